#include "mixreg/witness.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixreg/csv.hpp"
#include "mixreg/kernels.hpp"
#include "mixreg/penalized.hpp"

namespace mixreg {

namespace {

// Factors [X_{i,S}; -y_i] for the support-restricted data matrices.
Matrix restricted_factors(const Instance& inst, const std::vector<int>& support) {
  const int s = static_cast<int>(support.size());
  Matrix v(s + 1, inst.n());
  for (int i = 0; i < inst.n(); ++i) {
    for (int j = 0; j < s; ++j) v(j, i) = inst.X(i, support[static_cast<std::size_t>(j)]);
    v(s, i) = -inst.y[i];
  }
  return v;
}

PenalizedProblem component_problem(const Instance& inst, const std::vector<int>& rows,
                                   const std::vector<int>& cols, double lambda) {
  PenalizedProblem p;
  p.lambda = lambda;
  p.X.resize(static_cast<Eigen::Index>(rows.size()),
             cols.empty() ? inst.d() : static_cast<Eigen::Index>(cols.size()));
  p.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int i = rows[r];
    if (cols.empty()) {
      p.X.row(static_cast<Eigen::Index>(r)) = inst.X.row(i);
    } else {
      for (std::size_t j = 0; j < cols.size(); ++j)
        p.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = inst.X(i, cols[j]);
    }
    p.y[static_cast<Eigen::Index>(r)] = inst.y[i];
  }
  return p;
}

Vector restrict_vector(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[idx[j]];
  return out;
}

}  // namespace

WitnessCertificate construct_witness(const Instance& inst, double lambda1,
                                     double lambda2) {
  if (!inst.truth) throw std::invalid_argument("construct_witness: ground truth required");
  const GroundTruth& truth = *inst.truth;

  WitnessCertificate cert;
  cert.P = truth.support1();
  cert.Q = truth.support2();
  cert.lambda1 = lambda1;
  cert.lambda2 = lambda2;

  const int n = inst.n();
  cert.t.resize(n);
  for (int i = 0; i < n; ++i)
    cert.t[i] = truth.z[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  const std::vector<int> rows1 = inst.rows_with_label(1);
  const std::vector<int> rows2 = inst.rows_with_label(0);

  const PenalizedSolution sol1 =
      solve_penalized(component_problem(inst, rows1, cert.P, lambda1));
  const PenalizedSolution sol2 =
      solve_penalized(component_problem(inst, rows2, cert.Q, lambda2));
  if (!sol1.converged || !sol2.converged)
    throw std::runtime_error("construct_witness: penalized solve did not converge");
  cert.beta_tilde1 = sol1.beta;
  cert.beta_tilde2 = sol2.beta;

  // Z = [z;1][z',1] with z the penalized-regression subgradient.
  Vector z1(sol1.z.size() + 1), z2(sol2.z.size() + 1);
  z1 << sol1.z, 1.0;
  z2 << sol2.z, 1.0;
  cert.Z = z1 * z1.transpose();
  cert.V = z2 * z2.transpose();

  const Matrix wbar = cert.Wbar();
  const Matrix ubar = cert.Ubar();
  const Matrix vp = restricted_factors(inst, cert.P);
  const Matrix vq = restricted_factors(inst, cert.Q);

  cert.mu = Vector::Zero(n);
  cert.nu = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double sw = vp.col(i).dot(wbar * vp.col(i));  // <S_i^P, Wbar>
    const double su = vq.col(i).dot(ubar * vq.col(i));  // <S_i^Q, Ubar>
    if (truth.z[static_cast<std::size_t>(i)] == 1)
      cert.mu[i] = -0.5 * sw + 0.5 * su;
    else
      cert.nu[i] = 0.5 * sw - 0.5 * su;
  }

  const Vector cw = (Vector::Ones(n) + cert.t) * 0.5;
  const Vector cu = (Vector::Ones(n) - cert.t) * 0.5;
  const Matrix ap = kernels::weighted_gram(vp, cw, kernels::Exec::parallel);
  const Matrix bq = kernels::weighted_gram(vq, cu, kernels::Exec::parallel);

  cert.alpha = -((ap + lambda1 * cert.Z).cwiseProduct(wbar)).sum();
  cert.gamma = -((bq + lambda2 * cert.V).cwiseProduct(ubar)).sum();

  cert.Pi = ap + lambda1 * cert.Z;
  cert.Pi(cert.Pi.rows() - 1, cert.Pi.cols() - 1) += cert.alpha;
  cert.LambdaM = bq + lambda2 * cert.V;
  cert.LambdaM(cert.LambdaM.rows() - 1, cert.LambdaM.cols() - 1) += cert.gamma;
  return cert;
}

KktReport verify_kkt(const Instance& inst, const WitnessCertificate& cert,
                     const KktTolerances& tol, const Matrix* population_cov) {
  if (!inst.truth) throw std::invalid_argument("verify_kkt: ground truth required");
  KktReport rep;
  const GroundTruth& truth = *inst.truth;
  const int n = inst.n();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  const Matrix wbar = cert.Wbar();
  const Matrix ubar = cert.Ubar();
  const Matrix vp = restricted_factors(inst, cert.P);
  const Matrix vq = restricted_factors(inst, cert.Q);
  const Vector cw = (Vector::Ones(n) + cert.t) * 0.5;
  const Vector cu = (Vector::Ones(n) - cert.t) * 0.5;
  const Matrix ap = kernels::weighted_gram(vp, cw, kernels::Exec::parallel);
  const Matrix bq = kernels::weighted_gram(vq, cu, kernels::Exec::parallel);

  auto add = [&rep](const std::string& name, double residual, double threshold,
                    bool lower_bound = false) {
    KktCondition c;
    c.name = name;
    c.residual = residual;
    c.threshold = threshold;
    c.lower_bound = lower_bound;
    c.pass = lower_bound ? residual > threshold : residual <= threshold;
    rep.conditions.push_back(c);
    return c.pass;
  };

  // Stationarity of the assembled dual matrices.
  {
    Matrix lhs_w = ap + cert.lambda1 * cert.Z;
    lhs_w(lhs_w.rows() - 1, lhs_w.cols() - 1) += cert.alpha;
    const double scale_w = 1.0 + lhs_w.cwiseAbs().maxCoeff();
    rep.stationarity_w = (lhs_w - cert.Pi).cwiseAbs().maxCoeff();
    add("stationarity_w", rep.stationarity_w, tol.stationarity * scale_w);

    Matrix lhs_u = bq + cert.lambda2 * cert.V;
    lhs_u(lhs_u.rows() - 1, lhs_u.cols() - 1) += cert.gamma;
    const double scale_u = 1.0 + lhs_u.cwiseAbs().maxCoeff();
    rep.stationarity_u = (lhs_u - cert.LambdaM).cwiseAbs().maxCoeff();
    add("stationarity_u", rep.stationarity_u, tol.stationarity * scale_u);
  }
  {
    double worst = 0.0;
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      const double sw = vp.col(i).dot(wbar * vp.col(i));
      const double su = vq.col(i).dot(ubar * vq.col(i));
      scale = std::max(scale, 1.0 + 0.5 * std::abs(sw) + 0.5 * std::abs(su));
      worst = std::max(worst, std::abs(0.5 * sw - 0.5 * su - cert.nu[i] + cert.mu[i]));
    }
    rep.stationarity_t = worst;
    add("stationarity_t", rep.stationarity_t, tol.stationarity * scale);
  }

  // Complementary slackness.
  rep.comp_slack_pi = std::abs(cert.Pi.cwiseProduct(wbar).sum());
  add("comp_slack_pi_w", rep.comp_slack_pi, tol.comp_slack);
  rep.comp_slack_lambda = std::abs(cert.LambdaM.cwiseProduct(ubar).sum());
  add("comp_slack_lambda_u", rep.comp_slack_lambda, tol.comp_slack);
  {
    double worst_mu = 0.0, worst_nu = 0.0;
    for (int i = 0; i < n; ++i) {
      worst_mu = std::max(worst_mu, std::abs(cert.mu[i] * (cert.t[i] - 1.0)));
      worst_nu = std::max(worst_nu, std::abs(cert.nu[i] * (cert.t[i] + 1.0)));
    }
    rep.comp_slack_mu_t = worst_mu;
    rep.comp_slack_nu_t = worst_nu;
    add("comp_slack_mu_t", worst_mu, tol.comp_slack);
    add("comp_slack_nu_t", worst_nu, tol.comp_slack);
  }

  // Dual feasibility: sign constraints and eigenvalue structure.
  rep.mu_min = cert.mu.minCoeff();
  rep.nu_min = cert.nu.minCoeff();
  add("dual_mu_min", -rep.mu_min, tol.dual_sign);
  add("dual_nu_min", -rep.nu_min, tol.dual_sign);

  Eigen::SelfAdjointEigenSolver<Matrix> es_pi(0.5 * (cert.Pi + cert.Pi.transpose()));
  Eigen::SelfAdjointEigenSolver<Matrix> es_la(0.5 * (cert.LambdaM + cert.LambdaM.transpose()));
  rep.eig1_pi = es_pi.eigenvalues()[0];
  rep.eig2_pi = es_pi.eigenvalues().size() > 1 ? es_pi.eigenvalues()[1] : nan;
  rep.eig1_lambda = es_la.eigenvalues()[0];
  rep.eig2_lambda = es_la.eigenvalues().size() > 1 ? es_la.eigenvalues()[1] : nan;
  add("eig1_pi", std::abs(rep.eig1_pi), tol.eig1_abs);
  add("eig1_lambda", std::abs(rep.eig1_lambda), tol.eig1_abs);
  add("eig2_pi", rep.eig2_pi, tol.eig2_min, /*lower_bound=*/true);
  add("eig2_lambda", rep.eig2_lambda, tol.eig2_min, /*lower_bound=*/true);

  {
    Vector v1(cert.beta_tilde1.size() + 1), v2(cert.beta_tilde2.size() + 1);
    v1 << cert.beta_tilde1, 1.0;
    v2 << cert.beta_tilde2, 1.0;
    const double pi_norm = es_pi.eigenvalues().cwiseAbs().maxCoeff();
    const double la_norm = es_la.eigenvalues().cwiseAbs().maxCoeff();
    rep.nullvec_pi = (cert.Pi * v1).norm() / v1.norm();
    rep.nullvec_lambda = (cert.LambdaM * v2).norm() / v2.norm();
    add("nullvec_pi", rep.nullvec_pi, tol.nullvec * (1.0 + pi_norm));
    add("nullvec_lambda", rep.nullvec_lambda, tol.nullvec * (1.0 + la_norm));
  }

  // Primal feasibility of the compact variables.
  {
    LiftedState compact;
    compact.t = cert.t;
    compact.W = wbar;
    compact.U = ubar;
    rep.primal_violation = feasibility_violation(compact);
    add("primal_feasibility", rep.primal_violation, tol.primal);
  }

  // Parameter error vs the closed-form bound.
  const AssumptionAudit aud = audit(inst);
  {
    const Vector d1 = cert.beta_tilde1 - restrict_vector(truth.beta1, cert.P);
    const Vector d2 = cert.beta_tilde2 - restrict_vector(truth.beta2, cert.Q);
    rep.delta1_l2 = d1.norm();
    rep.delta2_l2 = d2.norm();
    const double b1 = truth.beta1.lpNorm<1>();
    const double b2 = truth.beta2.lpNorm<1>();
    const double s1 = static_cast<double>(cert.P.size());
    const double s2 = static_cast<double>(cert.Q.size());
    const double n1 = static_cast<double>(inst.n1);
    const double n2 = static_cast<double>(inst.n2);
    rep.delta1_bound_emp =
        aud.cmin_hat > 0 ? (2.0 + b1) * 2.0 * cert.lambda1 * std::sqrt(s1) / (aud.cmin_hat * n1)
                         : nan;
    rep.delta2_bound_emp =
        aud.cmin_hat > 0 ? (2.0 + b2) * 2.0 * cert.lambda2 * std::sqrt(s2) / (aud.cmin_hat * n2)
                         : nan;
    rep.delta1_within_bound = rep.delta1_l2 <= rep.delta1_bound_emp;
    rep.delta2_within_bound = rep.delta2_l2 <= rep.delta2_bound_emp;
    rep.delta1_bound_pop = nan;
    rep.delta2_bound_pop = nan;
    if (population_cov != nullptr) {
      auto block_min_eig = [&](const std::vector<int>& s) {
        Matrix blk(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i)
          for (std::size_t j = 0; j < s.size(); ++j)
            blk(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (*population_cov)(s[i], s[j]);
        Eigen::SelfAdjointEigenSolver<Matrix> es(blk);
        return es.eigenvalues().minCoeff();
      };
      const double cmin_pop = std::min(block_min_eig(cert.P), block_min_eig(cert.Q));
      if (cmin_pop > 0) {
        rep.delta1_bound_pop = (2.0 + b1) * 2.0 * cert.lambda1 * std::sqrt(s1) / (cmin_pop * n1);
        rep.delta2_bound_pop = (2.0 + b2) * 2.0 * cert.lambda2 * std::sqrt(s2) / (cmin_pop * n2);
      }
    }
    add("delta1_bound", rep.delta1_l2, rep.delta1_bound_emp);
    add("delta2_bound", rep.delta2_l2, rep.delta2_bound_emp);
  }

  // Strict dual feasibility of the full-dimensional component problems.
  {
    const std::vector<int> rows1 = inst.rows_with_label(1);
    const std::vector<int> rows2 = inst.rows_with_label(0);
    Vector full1 = Vector::Zero(inst.d());
    for (std::size_t j = 0; j < cert.P.size(); ++j)
      full1[cert.P[j]] = cert.beta_tilde1[static_cast<Eigen::Index>(j)];
    Vector full2 = Vector::Zero(inst.d());
    for (std::size_t j = 0; j < cert.Q.size(); ++j)
      full2[cert.Q[j]] = cert.beta_tilde2[static_cast<Eigen::Index>(j)];
    const SubgradientCertificate c1 = subgradient_certificate(
        component_problem(inst, rows1, {}, cert.lambda1), full1, cert.P);
    const SubgradientCertificate c2 = subgradient_certificate(
        component_problem(inst, rows2, {}, cert.lambda2), full2, cert.Q);
    rep.strict_dual_1 = c1.max_abs_off;
    rep.strict_dual_2 = c2.max_abs_off;
    const double xi_hat = std::max(0.0, 1.0 - aud.incoherence_hat);
    rep.strict_dual_threshold = 1.0 - xi_hat / 4.0;
    rep.strict_dual_1_ok = rep.strict_dual_1 <= rep.strict_dual_threshold;
    rep.strict_dual_2_ok = rep.strict_dual_2 <= rep.strict_dual_threshold;
    add("strict_dual_1", rep.strict_dual_1, rep.strict_dual_threshold);
    add("strict_dual_2", rep.strict_dual_2, rep.strict_dual_threshold);
  }

  // Empirical counterpart of the identifiability requirement used by the
  // dual-sign argument (informational).
  {
    Eigen::SelfAdjointEigenSolver<Matrix> e1(
        kernels::mean_gram_rows(inst.X, inst.rows_with_label(1), kernels::Exec::parallel));
    Eigen::SelfAdjointEigenSolver<Matrix> e2(
        kernels::mean_gram_rows(inst.X, inst.rows_with_label(0), kernels::Exec::parallel));
    const double cmax_full = std::max(e1.eigenvalues().maxCoeff(), e2.eigenvalues().maxCoeff());
    const double n1 = static_cast<double>(inst.n1);
    const double n2 = static_cast<double>(inst.n2);
    rep.lemma5_lhs = aud.eps_identifiability;
    rep.lemma5_rhs = 3.0 * n1 * cmax_full * rep.delta1_l2 * rep.delta1_l2 -
                     n2 * aud.cmin_hat * rep.delta2_l2 * rep.delta2_l2 +
                     3.0 * (n1 + n2) * cmax_full * (truth.beta1 - truth.beta2).norm() *
                         rep.delta2_l2;
    rep.lemma5_holds = rep.lemma5_lhs >= rep.lemma5_rhs;
  }
  return rep;
}

bool KktReport::kkt_pass() const {
  for (const auto& c : conditions) {
    if (c.name == "delta1_bound" || c.name == "delta2_bound" ||
        c.name == "strict_dual_1" || c.name == "strict_dual_2")
      continue;
    if (!c.pass) return false;
  }
  return true;
}

LiftedState assemble_full_solution(const WitnessCertificate& cert, int d,
                                   const std::vector<int>& P,
                                   const std::vector<int>& Q) {
  for (int j : P)
    if (j < 0 || j >= d) throw std::invalid_argument("assemble: P index out of range");
  for (int j : Q)
    if (j < 0 || j >= d) throw std::invalid_argument("assemble: Q index out of range");
  if (static_cast<Eigen::Index>(P.size()) != cert.beta_tilde1.size() ||
      static_cast<Eigen::Index>(Q.size()) != cert.beta_tilde2.size())
    throw std::invalid_argument("assemble: support size mismatch");

  LiftedState s;
  s.t = cert.t;
  s.W = Matrix::Zero(d + 1, d + 1);
  s.U = Matrix::Zero(d + 1, d + 1);
  const Matrix wbar = cert.Wbar();
  const Matrix ubar = cert.Ubar();
  auto embed = [d](Matrix& full, const Matrix& compact, const std::vector<int>& idxs) {
    std::vector<int> map(idxs.size() + 1);
    for (std::size_t j = 0; j < idxs.size(); ++j) map[j] = idxs[j];
    map[idxs.size()] = d;
    for (std::size_t a = 0; a < map.size(); ++a)
      for (std::size_t b = 0; b < map.size(); ++b)
        full(map[a], map[b]) = compact(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  embed(s.W, wbar, P);
  embed(s.U, ubar, Q);
  return s;
}

void write_kkt_report_csv(const KktReport& report, const std::string& path) {
  csv::Writer w(path);
  w.raw_line("condition,residual,threshold,pass");
  for (const auto& c : report.conditions) {
    w.field(c.name);
    w.field(c.residual);
    w.field(c.threshold);
    w.field(std::string(c.pass ? "1" : "0"));
    w.end_row();
  }
}

}  // namespace mixreg
