#pragma once

#include <cstdint>
#include <string>

#include "mixreg/instance.hpp"
#include "mixreg/kernels.hpp"

namespace mixreg {

struct OracleResult {
  Labels best_labels;
  Vector best_beta1;
  Vector best_beta2;
  double best_objective = 0.0;
  long long labelings_evaluated = 0;
};

// Exhaustive minimum over all 2^n labelings; each labeling is scored by the
// two full-column penalized regressions. Ties go to the lexicographically
// smallest labeling. Rejects n > n_cap.
OracleResult brute_force(const Instance& inst, double lambda1, double lambda2,
                         int n_cap = 14,
                         kernels::Exec exec = kernels::Exec::parallel);

void write_oracle_csv(const OracleResult& result, const std::string& path);
std::string oracle_csv_string(const OracleResult& result);

// Two parameter configurations of the continuous-label relaxation whose
// first-order gap F has opposite signs, demonstrating non-convexity.
struct NonconvexityDemo {
  // Shared configuration: all labels z = 0, reference zbar = 1/2.
  Matrix X;
  Vector y;
  int coord_beta1 = 0;   // the single supported coordinate of beta1
  int coord_beta2 = 1;   // of beta2
  struct Choice {
    double u1, u2, w1, w2;  // beta1/beta2 values and their reference values
    double F;               // first-order gap at this configuration
  };
  Choice plus;   // u2 < w2, F > 0
  Choice minus;  // u2 > w2, F < 0
};

NonconvexityDemo nonconvexity_demo(std::uint64_t seed);

// First-order gap of l(z, b1, b2) = sum_i z_i (y_i - X_i'b1)^2 +
// (1-z_i)(y_i - X_i'b2)^2 between (z, b1, b2) and (zbar, b1bar, b2bar),
// evaluated from the raw partial derivatives.
double relaxation_first_order_gap(const Matrix& X, const Vector& y,
                                  const Vector& z, const Vector& b1, const Vector& b2,
                                  const Vector& zbar, const Vector& b1bar,
                                  const Vector& b2bar);

}  // namespace mixreg
