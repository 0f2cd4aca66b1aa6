#include "mixreg/lifting.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mixreg/csv.hpp"

namespace mixreg {

Matrix lift(const Vector& beta) {
  const Eigen::Index d = beta.size();
  Matrix m(d + 1, d + 1);
  m.topLeftCorner(d, d).noalias() = beta * beta.transpose();
  m.topRightCorner(d, 1) = beta;
  m.bottomLeftCorner(1, d) = beta.transpose();
  m(d, d) = 1.0;
  return m;
}

LiftedData LiftedData::build(const Instance& inst) {
  LiftedData data;
  data.V_.resize(inst.d() + 1, inst.n());
  for (int i = 0; i < inst.n(); ++i) {
    data.V_.col(i).head(inst.d()) = inst.X.row(i).transpose();
    data.V_(inst.d(), i) = -inst.y[i];
  }
  return data;
}

double LiftedData::residual_sq(int i, const Vector& beta) const {
  const Eigen::Index d = V_.rows() - 1;
  const double r = V_.col(i).head(d).dot(beta) + V_(d, i);  // X_i'beta - y_i
  return r * r;
}

double feasibility_violation(const LiftedState& s) {
  double v = 0.0;
  if (s.t.size() > 0) v = std::max(v, s.t.cwiseAbs().maxCoeff() - 1.0);
  for (const Matrix* m : {&s.W, &s.U}) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (*m + m->transpose()));
    const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
    v = std::max(v, -es.eigenvalues().minCoeff() / scale);
    v = std::max(v, std::abs((*m)(m->rows() - 1, m->cols() - 1) - 1.0));
  }
  return std::max(v, 0.0);
}

bool is_feasible(const LiftedState& s, const FeasibilityTolerances& tol) {
  if (s.t.size() > 0 && s.t.cwiseAbs().maxCoeff() > 1.0 + tol.box) return false;
  for (const Matrix* m : {&s.W, &s.U}) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (*m + m->transpose()));
    const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -tol.psd * scale) return false;
    if (std::abs((*m)(m->rows() - 1, m->cols() - 1) - 1.0) > tol.corner) return false;
  }
  return true;
}

double smooth_objective(const LiftedState& s, const LiftedData& data,
                        kernels::Exec exec) {
  Vector qw, qu;
  kernels::quad_forms(data.factors(), s.W, qw, exec);
  kernels::quad_forms(data.factors(), s.U, qu, exec);
  const Eigen::Index n = qw.size();
  const Eigen::Index nc = (n + kernels::kChunk - 1) / kernels::kChunk;
  double total = 0.0;
  for (Eigen::Index ch = 0; ch < nc; ++ch) {
    const Eigen::Index lo = ch * kernels::kChunk;
    const Eigen::Index hi = std::min(lo + kernels::kChunk, n);
    double acc = 0.0;
    for (Eigen::Index i = lo; i < hi; ++i)
      acc += 0.5 * (1.0 + s.t[i]) * qw[i] + 0.5 * (1.0 - s.t[i]) * qu[i];
    total += acc;
  }
  if (!std::isfinite(total)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double term = 0.5 * (1.0 + s.t[i]) * qw[i] + 0.5 * (1.0 - s.t[i]) * qu[i];
      if (!std::isfinite(term)) throw NumericOverflowError(i);
    }
    throw NumericOverflowError(-1);
  }
  return total;
}

double objective(const LiftedState& s, const LiftedData& data, double lambda1,
                 double lambda2, kernels::Exec exec) {
  const double f = smooth_objective(s, data, exec);
  const double val =
      f + lambda1 * s.W.cwiseAbs().sum() + lambda2 * s.U.cwiseAbs().sum();
  if (!std::isfinite(val)) throw NumericOverflowError(-1);
  return val;
}

double invexity_gap(const LiftedState& a, const LiftedState& b,
                    const LiftedData& data, kernels::Exec exec) {
  const double fa = smooth_objective(a, data, exec);
  const double fb = smooth_objective(b, data, exec);
  // grad_W f(b) = sum (1+t_i)/2 S_i, grad_U f(b) = sum (1-t_i)/2 S_i,
  // grad_t f(b)_i = <S_i, W_b - U_b>/2; eta = (0, -W_b, -U_b).
  const Vector cw = (Vector::Ones(b.t.size()) + b.t) * 0.5;
  const Vector cu = (Vector::Ones(b.t.size()) - b.t) * 0.5;
  const Matrix gw = kernels::weighted_gram(data.factors(), cw, exec);
  const Matrix gu = kernels::weighted_gram(data.factors(), cu, exec);
  const double eta_dot_grad = -(b.W.cwiseProduct(gw).sum() + b.U.cwiseProduct(gu).sum());
  return fa - fb - eta_dot_grad;
}

namespace {

// Pull a lifted vector out of one PSD corner-constrained matrix.
Vector read_off(const Matrix& m, double rank_tol, bool* rank1) {
  const Eigen::Index d = m.rows() - 1;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector ev = es.eigenvalues();
  const double top = ev[d];
  *rank1 = ev.head(d).cwiseAbs().maxCoeff() <= rank_tol * (1.0 + std::abs(top));
  if (*rank1) {
    const double corner = m(d, d);
    if (std::abs(corner) < rank_tol)
      throw std::runtime_error("extract_solution: corner entry below rank tolerance");
    return m.col(d).head(d) / corner;
  }
  // Best rank-1 PSD approximation, corner renormalized to 1.
  Vector u = es.eigenvectors().col(d) * std::sqrt(std::max(top, 0.0));
  if (std::abs(u[d]) < rank_tol)
    throw std::runtime_error("extract_solution: rank-1 approximation has vanishing corner");
  return u.head(d) / u[d];
}

}  // namespace

ExtractedSolution extract_solution(const LiftedState& s, double rank_tol) {
  ExtractedSolution out;
  out.beta1 = read_off(s.W, rank_tol, &out.w_rank1);
  out.beta2 = read_off(s.U, rank_tol, &out.u_rank1);
  out.z.resize(static_cast<std::size_t>(s.t.size()));
  for (Eigen::Index i = 0; i < s.t.size(); ++i)
    out.z[static_cast<std::size_t>(i)] = s.t[i] >= 0.0 ? 1 : 0;
  return out;
}

void save_state(const LiftedState& s, const std::string& dir) {
  csv::write_vector(dir + "/state_t.csv", s.t);
  csv::write_matrix(dir + "/state_W.csv", s.W);
  csv::write_matrix(dir + "/state_U.csv", s.U);
}

LiftedState load_state(const std::string& dir) {
  LiftedState s;
  s.t = csv::read_vector(dir + "/state_t.csv");
  s.W = csv::read_matrix(dir + "/state_W.csv");
  s.U = csv::read_matrix(dir + "/state_U.csv");
  return s;
}

}  // namespace mixreg
