#include "mixreg/solver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mixreg/csv.hpp"
#include "mixreg/rng.hpp"

namespace mixreg {

namespace {

Matrix sign_matrix(const Matrix& m) {
  return m.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

std::string dump_matrix(const Matrix& m) {
  std::ostringstream os;
  os << m;
  return os.str();
}

}  // namespace

Subgradient subgradient(const LiftedState& s, const LiftedData& data,
                        double lambda1, double lambda2, kernels::Exec exec) {
  Subgradient g;
  Vector qw, qu;
  kernels::quad_forms(data.factors(), s.W, qw, exec);
  kernels::quad_forms(data.factors(), s.U, qu, exec);
  g.g_t = 0.5 * (qw - qu);
  const Vector cw = (Vector::Ones(s.t.size()) + s.t) * 0.5;
  const Vector cu = (Vector::Ones(s.t.size()) - s.t) * 0.5;
  g.g_w = kernels::weighted_gram(data.factors(), cw, exec) + lambda1 * sign_matrix(s.W);
  g.g_u = kernels::weighted_gram(data.factors(), cu, exec) + lambda2 * sign_matrix(s.U);
  return g;
}

Matrix project_psd_corner(const Matrix& m, int max_iters, double tol) {
  const Eigen::Index d = m.rows() - 1;
  Matrix x = 0.5 * (m + m.transpose());
  Matrix p = Matrix::Zero(m.rows(), m.cols());
  Matrix q = Matrix::Zero(m.rows(), m.cols());
  for (int k = 0; k < max_iters; ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x + p);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("projection: eigendecomposition failed on\n" + dump_matrix(x + p));
    const Matrix y = es.eigenvectors() *
                     es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                     es.eigenvectors().transpose();
    p = x + p - y;
    Matrix xn = y + q;
    xn(d, d) = 1.0;
    q = y + q - xn;
    const double change = (xn - x).norm();
    x = std::move(xn);
    if (change <= tol) break;
  }
  x = 0.5 * (x + x.transpose());
  x(d, d) = 1.0;
  return x;
}

LiftedState project(const LiftedState& s, const SolverConfig& config) {
  LiftedState out;
  out.t = s.t.cwiseMax(-1.0).cwiseMin(1.0);
  out.W = project_psd_corner(s.W, config.dykstra_iters, config.dykstra_tol);
  out.U = project_psd_corner(s.U, config.dykstra_iters, config.dykstra_tol);
  return out;
}

SolveTrace solve(const Instance& inst, const SolverConfig& config) {
  if (inst.n() < 1) throw std::invalid_argument("solve: empty instance");
  if (config.lambda1 <= 0.0 || config.lambda2 <= 0.0)
    throw std::invalid_argument("solve: regularizers must be positive");
  if (config.max_iters < 1 || config.dykstra_iters < 1)
    throw std::invalid_argument("solve: iteration caps must be >= 1");

  const LiftedData data = LiftedData::build(inst);
  const int n = data.n();
  const int dim = data.dim();

  const double base_step =
      config.step0 > 0.0 ? config.step0 : 1.0 / data.sum_factor_sq();
  const double step_wu = config.wu_step_scale * base_step;
  const double step_t = config.t_step_scale * static_cast<double>(n) * base_step;

  LiftedState s;
  s.t = Vector::Zero(n);
  if (config.t_init_range > 0.0) {
    Rng rng(config.seed);
    for (int i = 0; i < n; ++i)
      s.t[i] = rng.uniform(-config.t_init_range, config.t_init_range);
  }
  s.W = Matrix::Zero(dim, dim);
  s.W(dim - 1, dim - 1) = 1.0;
  s.U = s.W;

  SolveTrace trace;
  trace.objectives.reserve(static_cast<std::size_t>(config.max_iters));
  trace.best_objective = objective(s, data, config.lambda1, config.lambda2, config.exec);
  trace.best_state = s;

  constexpr int kStopWindow = 50;
  std::vector<double> best_history;
  best_history.reserve(static_cast<std::size_t>(config.max_iters) + 1);
  best_history.push_back(trace.best_objective);

  int cycle_start = 0;
  int cycle_len = config.restart_period > 0 ? config.restart_period : config.max_iters;
  for (int k = 0; k < config.max_iters; ++k) {
    if (config.restart_period > 0 && k - cycle_start >= cycle_len) {
      cycle_start = k;
      cycle_len *= 2;
    }
    const int kk = k - cycle_start;
    const double decay = config.step_rule == SolverConfig::StepRule::inv_sqrt_k
                             ? 1.0 / std::sqrt(static_cast<double>(kk + 1))
                             : 1.0;

    const Subgradient g = subgradient(s, data, config.lambda1, config.lambda2, config.exec);
    LiftedState next;
    next.t = s.t - (step_t * decay) * g.g_t;
    next.W = s.W - (step_wu * decay) * g.g_w;
    next.U = s.U - (step_wu * decay) * g.g_u;
    s = project(next, config);

    const double obj = objective(s, data, config.lambda1, config.lambda2, config.exec);
    if (!std::isfinite(obj))
      throw std::runtime_error("solve: objective diverged at iteration " + std::to_string(k));
    trace.objectives.push_back(obj);
    trace.feasibility.push_back(feasibility_violation(s));
    if (config.validate_iterates && !is_feasible(s))
      throw std::runtime_error("solve: infeasible iterate at iteration " + std::to_string(k));
    if (obj < trace.best_objective) {
      trace.best_objective = obj;
      trace.best_state = s;
    }
    best_history.push_back(trace.best_objective);
    trace.iterations_run = k + 1;

    if (k + 1 >= kStopWindow) {
      const double before = best_history[static_cast<std::size_t>(k + 1 - kStopWindow)];
      const double improvement = before - trace.best_objective;
      if (improvement < config.stop_tol * (1.0 + std::abs(trace.best_objective))) {
        trace.converged = true;
        break;
      }
    }
  }
  trace.final_state = s;
  return trace;
}

RefineResult refine(const Instance& inst, const Labels& labels,
                    const SolverConfig& config) {
  if (static_cast<int>(labels.size()) != inst.n())
    throw std::invalid_argument("refine: labels length mismatch");
  for (int v : labels)
    if (v != 0 && v != 1) throw std::invalid_argument("refine: labels must be 0/1");

  RefineResult out;
  for (int component = 1; component >= 0; --component) {
    std::vector<int> rows;
    for (int i = 0; i < inst.n(); ++i)
      if (labels[static_cast<std::size_t>(i)] == component) rows.push_back(i);
    PenalizedProblem prob;
    prob.lambda = component == 1 ? config.lambda1 : config.lambda2;
    prob.X.resize(static_cast<Eigen::Index>(rows.size()), inst.d());
    prob.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      prob.X.row(static_cast<Eigen::Index>(r)) = inst.X.row(rows[r]);
      prob.y[static_cast<Eigen::Index>(r)] = inst.y[rows[r]];
    }
    PenalizedSolution sol = solve_penalized(prob);
    if (component == 1) {
      out.beta1 = sol.beta;
      out.degenerate1 = sol.degenerate;
      out.solution1 = std::move(sol);
    } else {
      out.beta2 = sol.beta;
      out.degenerate2 = sol.degenerate;
      out.solution2 = std::move(sol);
    }
  }
  return out;
}

void write_trace_csv(const SolveTrace& trace, const std::string& path) {
  csv::Writer w(path);
  w.raw_line("iter,objective,feasibility_violation");
  for (std::size_t k = 0; k < trace.objectives.size(); ++k) {
    w.field(static_cast<long long>(k));
    w.field(trace.objectives[k]);
    w.field(trace.feasibility[k]);
    w.end_row();
  }
}

}  // namespace mixreg
