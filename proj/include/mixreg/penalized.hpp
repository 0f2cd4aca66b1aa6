#pragma once

#include <vector>

#include "mixreg/types.hpp"

namespace mixreg {

// min_beta ||y - X beta||^2 + lambda (||beta||_1 + 1)^2
struct PenalizedProblem {
  Matrix X;       // m x k
  Vector y;       // m
  double lambda;  // > 0
};

struct PenalizedSolution {
  Vector beta;
  Vector z;          // subgradient of ||beta||_1 at the solution
  double objective = 0.0;
  int iterations = 0;  // outer fixed-point iterations
  bool converged = false;
  bool degenerate = false;  // empty or all-zero design
  std::vector<double> objective_trace;  // objective after each outer iteration
};

// Outer fixed point over the effective lasso penalty 2*lambda*(||beta||_1+1),
// inner cyclic coordinate descent, followed by an exact solve on the settled
// active set. tol bounds the change of ||beta||_1 between outer iterations.
PenalizedSolution solve_penalized(const PenalizedProblem& problem,
                                  double tol = 1e-10, int max_outer = 100);

// max-norm of 2X'(X beta - y) + 2 lambda (||beta||_1 + 1) z.
double stationarity_residual(const PenalizedProblem& problem,
                             const PenalizedSolution& solution);

struct SubgradientCertificate {
  Vector z_on;   // reconstructed subgradient on the support (support order)
  Vector z_off;  // off-support entries (ascending column order)
  double max_abs_off = 0.0;
  bool hpp_singular = false;
};

// Reconstructs the subgradient from the stationarity equation of `problem` at
// `beta`, split into on-/off-support coordinates.
SubgradientCertificate subgradient_certificate(const PenalizedProblem& problem,
                                               const Vector& beta,
                                               const std::vector<int>& support);
SubgradientCertificate subgradient_certificate(const PenalizedProblem& problem,
                                               const PenalizedSolution& solution,
                                               const std::vector<int>& support);

}  // namespace mixreg
