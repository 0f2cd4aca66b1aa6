#include "mixreg/penalized.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mixreg {

namespace {

double soft(double x, double thr) {
  if (x > thr) return x - thr;
  if (x < -thr) return x + thr;
  return 0.0;
}

double penalized_objective(const PenalizedProblem& p, const Vector& beta) {
  return (p.y - p.X * beta).squaredNorm() +
         p.lambda * std::pow(beta.lpNorm<1>() + 1.0, 2);
}

// Cyclic coordinate descent for ||y - X b||^2 + lam_eff ||b||_1, warm started.
// Sweep order is ascending column index; stops when the largest coordinate
// move in a sweep is <= 1e-10.
void cd_lasso(const Matrix& X, const Vector& y, double lam_eff,
              const Vector& colsq, Vector& beta) {
  constexpr double kMoveTol = 1e-10;
  constexpr int kMaxSweeps = 20000;
  Vector r = y - X * beta;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_move = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      if (colsq[j] == 0.0) continue;
      const double rho = X.col(j).dot(r) + colsq[j] * beta[j];
      const double nb = soft(rho, 0.5 * lam_eff) / colsq[j];
      const double move = nb - beta[j];
      if (move != 0.0) {
        r -= move * X.col(j);
        beta[j] = nb;
        max_move = std::max(max_move, std::abs(move));
      }
    }
    if (max_move <= kMoveTol) break;
  }
}

// Exact stationary point on a fixed active set with fixed signs:
//   (X_A' X_A + lambda s s') b = X_A' y - lambda s.
// Returns false when the solve fails or flips a sign.
bool active_set_solve(const PenalizedProblem& p, const std::vector<int>& active,
                      const Vector& signs, Vector& beta_out) {
  const int k = static_cast<int>(active.size());
  if (k == 0) {
    beta_out = Vector::Zero(p.X.cols());
    return true;
  }
  Matrix xa(p.X.rows(), k);
  for (int j = 0; j < k; ++j) xa.col(j) = p.X.col(active[static_cast<std::size_t>(j)]);
  Matrix a = xa.transpose() * xa;
  a.noalias() += p.lambda * (signs * signs.transpose());
  const Vector rhs = xa.transpose() * p.y - p.lambda * signs;
  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) return false;
  const Vector b = ldlt.solve(rhs);
  if (!b.allFinite()) return false;
  for (int j = 0; j < k; ++j)
    if (b[j] * signs[j] <= 0.0) return false;
  beta_out = Vector::Zero(p.X.cols());
  for (int j = 0; j < k; ++j) beta_out[active[static_cast<std::size_t>(j)]] = b[j];
  return true;
}

// One or two active-set refinements on top of the CD solution; brings the
// stationarity residual down to rounding error. Keeps the CD iterate when the
// refinement disagrees with it.
void polish(const PenalizedProblem& p, Vector& beta) {
  for (int round = 0; round < 1 + static_cast<int>(p.X.cols()); ++round) {
    std::vector<int> active;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
      if (beta[j] != 0.0) active.push_back(static_cast<int>(j));
    Vector signs(static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j)
      signs[static_cast<Eigen::Index>(j)] = beta[active[j]] > 0.0 ? 1.0 : -1.0;
    Vector candidate;
    if (!active_set_solve(p, active, signs, candidate)) return;
    const double obj_now = penalized_objective(p, beta);
    if (penalized_objective(p, candidate) > obj_now + 1e-12 * (1.0 + std::abs(obj_now)))
      return;
    beta = candidate;
    // Check off-active stationarity; pull in the worst violator if any.
    const Vector grad = p.X.transpose() * (p.y - p.X * beta);
    const double denom = p.lambda * (beta.lpNorm<1>() + 1.0);
    int worst = -1;
    double worst_excess = 1e-9;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      if (beta[j] != 0.0) continue;
      const double excess = std::abs(grad[j]) / denom - 1.0;
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = static_cast<int>(j);
      }
    }
    if (worst < 0) return;
    beta[worst] = grad[worst] > 0 ? 1e-300 : -1e-300;  // enters with this sign
  }
}

}  // namespace

PenalizedSolution solve_penalized(const PenalizedProblem& problem, double tol,
                                  int max_outer) {
  if (problem.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  const Eigen::Index k = problem.X.cols();
  PenalizedSolution sol;

  const bool empty_design =
      problem.X.rows() == 0 || k == 0 || problem.X.cwiseAbs().maxCoeff() == 0.0;
  if (empty_design) {
    sol.beta = Vector::Zero(k);
    sol.z = Vector::Zero(k);
    sol.objective = problem.y.squaredNorm() + problem.lambda;
    sol.converged = true;
    sol.degenerate = true;
    return sol;
  }

  Vector colsq(k);
  for (Eigen::Index j = 0; j < k; ++j) colsq[j] = problem.X.col(j).squaredNorm();

  // The fixed point of a -> ||lasso(2*lambda*(1+a))||_1 gives the stationary
  // point of the original objective. The map is non-increasing in a, so the
  // root is bracketed and unique; plain iteration is used while it stays
  // inside the bracket, bisection otherwise (the plain map can 2-cycle).
  Vector beta = Vector::Zero(k);
  double a = 0.0;   // current ||beta||_1
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double best_obj = penalized_objective(problem, beta);
  Vector best_beta = beta;

  int outer = 0;
  for (; outer < max_outer; ++outer) {
    const double lam_eff = 2.0 * problem.lambda * (a + 1.0);
    cd_lasso(problem.X, problem.y, lam_eff, colsq, beta);
    const double a_new = beta.lpNorm<1>();
    const double obj = penalized_objective(problem, beta);
    sol.objective_trace.push_back(obj);
    if (obj < best_obj) {
      best_obj = obj;
      best_beta = beta;
    }
    if (outer == 0) hi = std::max(a_new, tol);
    if (a_new > a) lo = std::max(lo, a); else hi = std::min(hi, a);
    if (std::abs(a_new - a) <= tol || hi - lo <= tol) {
      ++outer;
      sol.converged = true;
      break;
    }
    double next = a_new;
    if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
    a = next;
  }

  beta = best_beta;
  polish(problem, beta);
  if (penalized_objective(problem, beta) >
      best_obj + 1e-12 * (1.0 + std::abs(best_obj)))
    beta = best_beta;

  sol.beta = beta;
  sol.iterations = outer;
  sol.objective = penalized_objective(problem, beta);

  // Subgradient: signs on the support, stationarity ratio elsewhere.
  sol.z = Vector::Zero(k);
  const Vector grad = problem.X.transpose() * (problem.y - problem.X * beta);
  const double denom = problem.lambda * (beta.lpNorm<1>() + 1.0);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (beta[j] != 0.0)
      sol.z[j] = beta[j] > 0.0 ? 1.0 : -1.0;
    else
      sol.z[j] = std::clamp(grad[j] / denom, -1.0, 1.0);
  }
  return sol;
}

double stationarity_residual(const PenalizedProblem& problem,
                             const PenalizedSolution& solution) {
  const Vector g = 2.0 * problem.X.transpose() * (problem.X * solution.beta - problem.y) +
                   2.0 * problem.lambda * (solution.beta.lpNorm<1>() + 1.0) * solution.z;
  return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

SubgradientCertificate subgradient_certificate(const PenalizedProblem& problem,
                                               const Vector& beta,
                                               const std::vector<int>& support) {
  SubgradientCertificate cert;
  const Eigen::Index k = problem.X.cols();
  std::vector<char> on(static_cast<std::size_t>(k), 0);
  for (int j : support) on[static_cast<std::size_t>(j)] = 1;

  if (!support.empty()) {
    Matrix xp(problem.X.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) xp.col(static_cast<Eigen::Index>(j)) = problem.X.col(support[j]);
    const Matrix hpp = (xp.transpose() * xp) / static_cast<double>(problem.X.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> es(hpp);
    cert.hpp_singular =
        es.eigenvalues().minCoeff() <= 1e-12 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff());
  }

  const Vector grad = problem.X.transpose() * (problem.y - problem.X * beta);
  const double denom = problem.lambda * (beta.lpNorm<1>() + 1.0);
  cert.z_on.resize(static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j)
    cert.z_on[static_cast<Eigen::Index>(j)] = grad[support[j]] / denom;
  std::vector<double> off;
  for (Eigen::Index j = 0; j < k; ++j)
    if (!on[static_cast<std::size_t>(j)]) off.push_back(grad[j] / denom);
  cert.z_off = Eigen::Map<Vector>(off.data(), static_cast<Eigen::Index>(off.size()));
  cert.max_abs_off = off.empty() ? 0.0 : cert.z_off.cwiseAbs().maxCoeff();
  return cert;
}

SubgradientCertificate subgradient_certificate(const PenalizedProblem& problem,
                                               const PenalizedSolution& solution,
                                               const std::vector<int>& support) {
  return subgradient_certificate(problem, solution.beta, support);
}

}  // namespace mixreg
