#pragma once

#include <stdexcept>
#include <string>

#include "mixreg/instance.hpp"
#include "mixreg/kernels.hpp"
#include "mixreg/types.hpp"

namespace mixreg {

// [beta; 1][beta', 1], the rank-1 embedding of a coefficient vector.
Matrix lift(const Vector& beta);

// Point in the feasible set: t in [-1,1]^n, W and U symmetric PSD with unit
// corner entry.
struct LiftedState {
  Vector t;
  Matrix W;
  Matrix U;
};

struct FeasibilityTolerances {
  double psd = 1e-8;     // scaled by 1 + ||M||_2
  double corner = 1e-8;
  double box = 1e-8;
};

// Worst constraint violation of a state (0 when feasible).
double feasibility_violation(const LiftedState& s);
bool is_feasible(const LiftedState& s, const FeasibilityTolerances& tol = {});

// Thrown when the objective evaluates non-finite; carries the first sample
// index whose term overflowed (-1 when the overflow is in the penalty part).
struct NumericOverflowError : std::runtime_error {
  explicit NumericOverflowError(long long idx)
      : std::runtime_error("non-finite objective term at sample " + std::to_string(idx)),
        index(idx) {}
  long long index;
};

// The per-sample rank-1 data matrices S_i = [X_i; -y_i][X_i', -y_i], stored
// by their factors so inner products never materialize S_i.
class LiftedData {
 public:
  static LiftedData build(const Instance& inst);

  int n() const { return static_cast<int>(V_.cols()); }
  int dim() const { return static_cast<int>(V_.rows()); }  // d + 1

  // <S_i, M> = v_i' M v_i for a dense symmetric M.
  double quad_form(int i, const Matrix& m) const {
    return V_.col(i).dot(m * V_.col(i));
  }
  // <S_i, lift(beta)> = (X_i' beta - y_i)^2, O(d).
  double residual_sq(int i, const Vector& beta) const;

  Matrix dense_S(int i) const { return V_.col(i) * V_.col(i).transpose(); }
  const Matrix& factors() const { return V_; }  // column i holds [X_i; -y_i]
  double sum_factor_sq() const { return V_.squaredNorm(); }

 private:
  Matrix V_;
};

// Smooth part f of the objective:
//   sum_i (1+t_i)/2 <S_i, W> + (1-t_i)/2 <S_i, U>.
double smooth_objective(const LiftedState& s, const LiftedData& data,
                        kernels::Exec exec = kernels::Exec::parallel);

// f + lambda1 ||W(:)||_1 + lambda2 ||U(:)||_1. Throws NumericOverflowError on
// a non-finite result.
double objective(const LiftedState& s, const LiftedData& data, double lambda1,
                 double lambda2, kernels::Exec exec = kernels::Exec::parallel);

// First-order gap f(a) - f(b) - <eta, grad f(b)> for the invexity map
// eta = (0, -W_b, -U_b), evaluated from the raw partial derivatives.
double invexity_gap(const LiftedState& a, const LiftedState& b,
                    const LiftedData& data,
                    kernels::Exec exec = kernels::Exec::parallel);

struct ExtractedSolution {
  Vector beta1;
  Vector beta2;
  Labels z;
  bool w_rank1 = true;  // false => rank-1 approximation fallback was used
  bool u_rank1 = true;
};

// Reads (beta1, beta2, z) off a lifted state. Throws std::runtime_error when
// a corner entry is below rank_tol.
ExtractedSolution extract_solution(const LiftedState& s, double rank_tol = 1e-6);

void save_state(const LiftedState& s, const std::string& dir);
LiftedState load_state(const std::string& dir);

}  // namespace mixreg
