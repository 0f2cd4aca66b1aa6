#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixreg/instance.hpp"
#include "mixreg/lifting.hpp"

namespace mixreg {

// Primal and dual variables of the compact problem, constructed at the true
// labels with the support-restricted penalized regressions.
struct WitnessCertificate {
  Vector t;            // length n, entries +-1
  Vector beta_tilde1;  // length s1
  Vector beta_tilde2;  // length s2
  Matrix Z;            // (s1+1)^2 subgradient of ||Wbar(:)||_1
  Matrix V;            // (s2+1)^2 subgradient of ||Ubar(:)||_1
  Vector mu;           // length n, zero off I1
  Vector nu;           // length n, zero off I2
  Matrix Pi;           // (s1+1)^2
  Matrix LambdaM;      // (s2+1)^2
  double alpha = 0.0;
  double gamma = 0.0;

  std::vector<int> P;  // support of beta1*, ascending
  std::vector<int> Q;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  Matrix Wbar() const { return lift(beta_tilde1); }
  Matrix Ubar() const { return lift(beta_tilde2); }
};

struct KktTolerances {
  double stationarity = 1e-8;  // x scale of the assembled stationarity matrix
  double comp_slack = 1e-8;
  double dual_sign = 1e-10;    // mu, nu >= -dual_sign
  double eig1_abs = 1e-8;
  double eig2_min = 1e-6;
  double primal = 1e-8;
  double nullvec = 1e-8;       // x (1 + ||Pi||_2)
};

struct KktCondition {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
  // true when residual must stay ABOVE threshold (second eigenvalues)
  bool lower_bound = false;
};

struct KktReport {
  // Stationarity (assembled identities).
  double stationarity_w = 0.0, stationarity_u = 0.0, stationarity_t = 0.0;
  // Complementary slackness.
  double comp_slack_pi = 0.0, comp_slack_lambda = 0.0;
  double comp_slack_mu_t = 0.0, comp_slack_nu_t = 0.0;
  // Dual feasibility.
  double mu_min = 0.0, nu_min = 0.0;
  double eig1_pi = 0.0, eig2_pi = 0.0, eig1_lambda = 0.0, eig2_lambda = 0.0;
  double nullvec_pi = 0.0, nullvec_lambda = 0.0;  // |Pi [beta;1]| / |[beta;1]|
  // Primal feasibility.
  double primal_violation = 0.0;
  // Parameter error and its bound (empirical C_min; population when known).
  double delta1_l2 = 0.0, delta2_l2 = 0.0;
  double delta1_bound_emp = 0.0, delta2_bound_emp = 0.0;
  double delta1_bound_pop = 0.0, delta2_bound_pop = 0.0;  // NaN when unknown
  bool delta1_within_bound = false, delta2_within_bound = false;
  // Strict dual feasibility of the full-dimensional problems.
  double strict_dual_1 = 0.0, strict_dual_2 = 0.0;
  double strict_dual_threshold = 0.0;  // 1 - xi_hat/4
  bool strict_dual_1_ok = false, strict_dual_2_ok = false;
  // Empirical form of the identifiability requirement (informational).
  double lemma5_lhs = 0.0, lemma5_rhs = 0.0;
  bool lemma5_holds = false;

  std::vector<KktCondition> conditions;  // one row per verified condition

  // Every KKT condition flag (stationarity, complementary slackness, dual and
  // primal feasibility, eigenvalue structure). Excludes the parameter-error
  // bound and strict-dual rows, which are reported separately.
  bool kkt_pass() const;
};

// Builds the certificate: support-restricted penalized regressions for the
// primal block, closed-form duals. Throws when ground truth is missing or a
// penalized solve does not converge.
WitnessCertificate construct_witness(const Instance& inst, double lambda1,
                                     double lambda2);

// Evaluates every KKT condition residual plus the parameter-error bound and
// strict dual feasibility. Failures are flags, never exceptions.
KktReport verify_kkt(const Instance& inst, const WitnessCertificate& cert,
                     const KktTolerances& tol = {},
                     const Matrix* population_cov = nullptr);

// Zero-pads the compact solution back to (d+1)-dimensional lifted matrices.
LiftedState assemble_full_solution(const WitnessCertificate& cert, int d,
                                   const std::vector<int>& P,
                                   const std::vector<int>& Q);

// kkt_report.csv: one row per condition, columns condition,residual,threshold,pass.
void write_kkt_report_csv(const KktReport& report, const std::string& path);

}  // namespace mixreg
