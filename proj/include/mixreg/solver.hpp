#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixreg/instance.hpp"
#include "mixreg/lifting.hpp"
#include "mixreg/penalized.hpp"

namespace mixreg {

struct SolverConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  // Base step; <= 0 selects 1 / sum_i ||[X_i; -y_i]||^2. The t block runs on
  // a larger scale (see t_step_scale) because its subgradient entries are
  // per-sample quantities while the W/U blocks aggregate all samples.
  double step0 = 0.0;
  enum class StepRule { inv_sqrt_k, constant } step_rule = StepRule::inv_sqrt_k;
  double wu_step_scale = 4.0;
  double t_step_scale = 50.0;  // multiplied by n internally
  // inv_sqrt_k restarts its schedule with doubling period; 0 disables.
  int restart_period = 100;
  int max_iters = 4000;
  int dykstra_iters = 100;
  double dykstra_tol = 1e-11;
  double stop_tol = 1e-8;  // scaled by 1 + |best objective|
  std::uint64_t seed = 0;  // drives the randomized t initialization
  double t_init_range = 0.5;  // t0 ~ U[-range, range]; 0 gives the neutral start
  bool validate_iterates = false;  // assert feasibility each iteration
  kernels::Exec exec = kernels::Exec::parallel;
};

struct Subgradient {
  Vector g_t;
  Matrix g_w;
  Matrix g_u;
};

struct SolveTrace {
  std::vector<double> objectives;  // objective after each iteration
  std::vector<double> feasibility;
  LiftedState final_state;
  LiftedState best_state;
  double best_objective = 0.0;
  int iterations_run = 0;
  bool converged = false;
};

// Subgradient of the full objective at a feasible state; sgn(0) = 0 is the
// chosen element for the l1 terms.
Subgradient subgradient(const LiftedState& s, const LiftedData& data,
                        double lambda1, double lambda2,
                        kernels::Exec exec = kernels::Exec::parallel);

// Projection onto the feasible set: t clipped entrywise, W and U through
// Dykstra alternating projections onto {PSD} and {corner = 1}.
LiftedState project(const LiftedState& s, const SolverConfig& config);
Matrix project_psd_corner(const Matrix& m, int max_iters, double tol);

SolveTrace solve(const Instance& inst, const SolverConfig& config);

struct RefineResult {
  Vector beta1;
  Vector beta2;
  bool degenerate1 = false;
  bool degenerate2 = false;
  PenalizedSolution solution1;
  PenalizedSolution solution2;
};

// Per-component penalized regressions on the rows selected by `labels`
// (full column set); the final-reporting primal path.
RefineResult refine(const Instance& inst, const Labels& labels,
                    const SolverConfig& config);

// Columns: iter,objective,feasibility_violation.
void write_trace_csv(const SolveTrace& trace, const std::string& path);

}  // namespace mixreg
