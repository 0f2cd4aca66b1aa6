#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixreg/kernels.hpp"
#include "mixreg/types.hpp"

namespace mixreg {

// Covariance of the covariate rows.
struct CovSpec {
  enum class Kind { identity, diagonal, dense };
  Kind kind = Kind::identity;
  Vector diag;    // Kind::diagonal
  Matrix sigma;   // Kind::dense, symmetric PSD

  static CovSpec identity() { return {}; }
  static CovSpec diagonal(Vector d);
  static CovSpec dense(Matrix s);

  // Full covariance matrix of dimension d (for population quantities).
  Matrix materialize(int d) const;
};

struct GroundTruth {
  Vector beta1;          // length d, s1-sparse
  Vector beta2;          // length d, s2-sparse
  Labels z;              // length n, 1 => component 1
  Vector noise;          // stored draw e; empty when unknown (loaded instances)
  double epsilon_margin = 0.0;  // min identifiability margin, clamped at 0

  std::vector<int> support1() const;
  std::vector<int> support2() const;
};

struct Instance {
  Matrix X;  // n x d
  Vector y;  // n
  std::optional<GroundTruth> truth;
  int n1 = 0;
  int n2 = 0;

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  std::vector<int> rows_with_label(int label) const;
};

struct AssumptionAudit {
  // Identifiability (per-sample margins of the squared-residual gap).
  double eps_identifiability = 0.0;  // min margin, may be negative
  std::vector<int> violating_rows;   // rows with margin <= 0
  bool pass_identifiability = false;

  // Positive definiteness of the component design grams on their supports.
  double cmin_hat = 0.0;  // min(eig_min(H1_PP), eig_min(H2_QQ))
  double cmax_hat = 0.0;  // max(eig_max(H1_PP), eig_max(H2_QQ))
  bool h1pp_singular = false;
  bool h2qq_singular = false;
  bool pass_positive_definite = false;

  // Mutual incoherence (max-absolute-row-sum norm).
  double incoherence_1 = 0.0;  // ||H1_{P^c P} H1_{PP}^{-1}||_inf
  double incoherence_2 = 0.0;
  double incoherence_hat = 0.0;  // max of the two
  bool pass_incoherence = false;

  // Thresholds the pass flags were evaluated against.
  double pd_threshold = 0.0;           // cmin_hat must exceed this
  double incoherence_threshold = 1.0;  // incoherence_hat must stay below this

  bool all_pass() const {
    return pass_identifiability && pass_positive_definite && pass_incoherence;
  }
};

// Draws a synthetic two-component instance. Component labels are assigned
// first-n1/rest and the rows are then shuffled; identical arguments reproduce
// bit-identical instances. Throws std::invalid_argument on bad parameters or
// a non-PSD covariance.
Instance generate(int d, int s1, int s2, int n1, int n2, double noise_sigma,
                  const CovSpec& cov, std::uint64_t seed);

// Evaluates the three instance assumptions on the realized draw. Requires
// ground truth. Never throws on degenerate data; failures surface as flags.
AssumptionAudit audit(const Instance& inst,
                      kernels::Exec exec = kernels::Exec::parallel);

// Per-sample identifiability margins (positive = correctly identifiable).
Vector identifiability_margins(const Instance& inst);

// Instance directory serialization: X.csv, y.csv and (when truth is present)
// truth.csv with rows `beta1,<j>,<value>`, `beta2,<j>,<value>`, `z,<i>,<0|1>`.
void save_instance(const Instance& inst, const std::string& dir);
Instance load_instance(const std::string& dir);

}  // namespace mixreg
