#include "mixreg/instance.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "mixreg/csv.hpp"
#include "mixreg/rng.hpp"

namespace mixreg {

CovSpec CovSpec::diagonal(Vector d) {
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d[i] >= 0.0)) throw std::invalid_argument("diagonal covariance has negative entry");
  CovSpec c;
  c.kind = Kind::diagonal;
  c.diag = std::move(d);
  return c;
}

CovSpec CovSpec::dense(Matrix s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("covariance not square");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + s.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  if (es.eigenvalues().minCoeff() < -1e-10 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff()))
    throw std::invalid_argument("covariance not positive semidefinite");
  CovSpec c;
  c.kind = Kind::dense;
  c.sigma = std::move(s);
  return c;
}

Matrix CovSpec::materialize(int d) const {
  switch (kind) {
    case Kind::identity:
      return Matrix::Identity(d, d);
    case Kind::diagonal:
      if (diag.size() != d) throw std::invalid_argument("diagonal covariance has wrong length");
      return diag.asDiagonal();
    case Kind::dense:
      if (sigma.rows() != d) throw std::invalid_argument("covariance has wrong dimension");
      return sigma;
  }
  return Matrix::Identity(d, d);
}

static std::vector<int> support_of(const Vector& v) {
  std::vector<int> s;
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (v[j] != 0.0) s.push_back(static_cast<int>(j));
  return s;
}

std::vector<int> GroundTruth::support1() const { return support_of(beta1); }
std::vector<int> GroundTruth::support2() const { return support_of(beta2); }

std::vector<int> Instance::rows_with_label(int label) const {
  std::vector<int> out;
  if (!truth) return out;
  for (int i = 0; i < n(); ++i)
    if (truth->z[static_cast<std::size_t>(i)] == label) out.push_back(i);
  return out;
}

Instance generate(int d, int s1, int s2, int n1, int n2, double noise_sigma,
                  const CovSpec& cov, std::uint64_t seed) {
  if (d < 1 || s1 < 1 || s2 < 1) throw std::invalid_argument("d, s1, s2 must be >= 1");
  if (s1 > d || s2 > d) throw std::invalid_argument("sparsity exceeds dimension");
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("n1, n2 must be >= 1");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");

  // Covariance factor L with Sigma = L L'.
  Matrix chol_factor;
  Vector diag_scale;
  switch (cov.kind) {
    case CovSpec::Kind::identity:
      break;
    case CovSpec::Kind::diagonal:
      if (cov.diag.size() != d) throw std::invalid_argument("diagonal covariance has wrong length");
      diag_scale = cov.diag.cwiseSqrt();
      break;
    case CovSpec::Kind::dense: {
      if (cov.sigma.rows() != d) throw std::invalid_argument("covariance has wrong dimension");
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cov.sigma + cov.sigma.transpose()));
      const double lo = es.eigenvalues().minCoeff();
      if (lo < -1e-10 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff()))
        throw std::invalid_argument("covariance not positive semidefinite");
      chol_factor = es.eigenvectors() *
                    es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
      break;
    }
  }

  Rng rng(seed);
  const int n = n1 + n2;

  // Draw order is fixed: supports, magnitudes, X, noise, shuffle permutation.
  GroundTruth truth;
  truth.beta1 = Vector::Zero(d);
  truth.beta2 = Vector::Zero(d);
  const std::vector<int> p = rng.sample_without_replacement(d, s1);
  const std::vector<int> q = rng.sample_without_replacement(d, s2);
  for (int j : p) {
    const double mag = rng.uniform(0.5, 1.5);
    truth.beta1[j] = (rng.next_u64() & 1u) ? mag : -mag;
  }
  for (int j : q) {
    const double mag = rng.uniform(0.5, 1.5);
    truth.beta2[j] = (rng.next_u64() & 1u) ? mag : -mag;
  }

  Matrix X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = rng.normal();
  if (cov.kind == CovSpec::Kind::diagonal) {
    X = X * diag_scale.asDiagonal();
  } else if (cov.kind == CovSpec::Kind::dense) {
    X = X * chol_factor.transpose();
  }

  Vector e(n);
  for (int i = 0; i < n; ++i) e[i] = noise_sigma * rng.normal();

  Labels z(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n1; ++i) z[static_cast<std::size_t>(i)] = 1;

  Vector y(n);
  for (int i = 0; i < n; ++i) {
    const double dot = z[static_cast<std::size_t>(i)] == 1
                           ? X.row(i).dot(truth.beta1)
                           : X.row(i).dot(truth.beta2);
    y[i] = dot + e[i];
  }

  const std::vector<int> perm = rng.permutation(n);
  Instance inst;
  inst.X.resize(n, d);
  inst.y.resize(n);
  truth.z.resize(static_cast<std::size_t>(n));
  truth.noise.resize(n);
  for (int i = 0; i < n; ++i) {
    const int src = perm[static_cast<std::size_t>(i)];
    inst.X.row(i) = X.row(src);
    inst.y[i] = y[src];
    truth.z[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(src)];
    truth.noise[i] = e[src];
  }
  inst.n1 = n1;
  inst.n2 = n2;
  inst.truth = std::move(truth);

  const Vector margins = identifiability_margins(inst);
  inst.truth->epsilon_margin = std::max(0.0, margins.minCoeff());
  return inst;
}

Vector identifiability_margins(const Instance& inst) {
  if (!inst.truth) throw std::invalid_argument("margins need ground truth");
  const GroundTruth& t = *inst.truth;
  Vector m(inst.n());
  for (int i = 0; i < inst.n(); ++i) {
    const double r1 = inst.y[i] - inst.X.row(i).dot(t.beta1);
    const double r2 = inst.y[i] - inst.X.row(i).dot(t.beta2);
    const double gap = 0.5 * r2 * r2 - 0.5 * r1 * r1;
    m[i] = t.z[static_cast<std::size_t>(i)] == 1 ? gap : -gap;
  }
  return m;
}

namespace {

// Restrict rows/cols of a to the given index sets.
Matrix block(const Matrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(rows[i], cols[j]);
  return out;
}

std::vector<int> complement(const std::vector<int>& s, int d) {
  std::vector<char> in(static_cast<std::size_t>(d), 0);
  for (int j : s) in[static_cast<std::size_t>(j)] = 1;
  std::vector<int> out;
  for (int j = 0; j < d; ++j)
    if (!in[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

double inf_norm(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

AssumptionAudit audit(const Instance& inst, kernels::Exec exec) {
  if (!inst.truth) throw std::invalid_argument("audit needs ground truth");
  const GroundTruth& t = *inst.truth;
  AssumptionAudit a;

  const Vector margins = identifiability_margins(inst);
  a.eps_identifiability = margins.minCoeff();
  for (int i = 0; i < inst.n(); ++i)
    if (margins[i] <= 0.0) a.violating_rows.push_back(i);
  a.pass_identifiability = a.eps_identifiability > 0.0;

  const std::vector<int> rows1 = inst.rows_with_label(1);
  const std::vector<int> rows2 = inst.rows_with_label(0);
  const Matrix h1 = kernels::mean_gram_rows(inst.X, rows1, exec);
  const Matrix h2 = kernels::mean_gram_rows(inst.X, rows2, exec);

  const std::vector<int> p = t.support1();
  const std::vector<int> q = t.support2();
  const std::vector<int> pc = complement(p, inst.d());
  const std::vector<int> qc = complement(q, inst.d());

  const Matrix h1pp = block(h1, p, p);
  const Matrix h2qq = block(h2, q, q);
  Eigen::SelfAdjointEigenSolver<Matrix> es1(h1pp);
  Eigen::SelfAdjointEigenSolver<Matrix> es2(h2qq);
  const double eig1_min = es1.eigenvalues().minCoeff();
  const double eig2_min = es2.eigenvalues().minCoeff();
  a.cmin_hat = std::min(eig1_min, eig2_min);
  a.cmax_hat = std::max(es1.eigenvalues().maxCoeff(), es2.eigenvalues().maxCoeff());

  const double singular_tol = 1e-12 * (1.0 + a.cmax_hat);
  a.h1pp_singular = eig1_min <= singular_tol;
  a.h2qq_singular = eig2_min <= singular_tol;
  a.pd_threshold = 0.0;
  a.pass_positive_definite =
      !a.h1pp_singular && !a.h2qq_singular && a.cmin_hat > a.pd_threshold;

  a.incoherence_threshold = 1.0;
  if (a.h1pp_singular || a.h2qq_singular) {
    a.incoherence_1 = a.incoherence_2 = a.incoherence_hat =
        std::numeric_limits<double>::infinity();
    a.pass_incoherence = false;
  } else {
    a.incoherence_1 = inf_norm(block(h1, pc, p) * h1pp.inverse());
    a.incoherence_2 = inf_norm(block(h2, qc, q) * h2qq.inverse());
    a.incoherence_hat = std::max(a.incoherence_1, a.incoherence_2);
    a.pass_incoherence = a.incoherence_hat < a.incoherence_threshold;
  }
  return a;
}

void save_instance(const Instance& inst, const std::string& dir) {
  std::filesystem::create_directories(dir);
  csv::write_matrix(dir + "/X.csv", inst.X);
  csv::write_vector(dir + "/y.csv", inst.y);
  if (inst.truth) {
    std::ofstream out(dir + "/truth.csv");
    if (!out) throw std::runtime_error("cannot open for write: " + dir + "/truth.csv");
    const GroundTruth& t = *inst.truth;
    for (Eigen::Index j = 0; j < t.beta1.size(); ++j)
      if (t.beta1[j] != 0.0)
        out << "beta1," << j << ',' << csv::format(t.beta1[j]) << '\n';
    for (Eigen::Index j = 0; j < t.beta2.size(); ++j)
      if (t.beta2[j] != 0.0)
        out << "beta2," << j << ',' << csv::format(t.beta2[j]) << '\n';
    for (std::size_t i = 0; i < t.z.size(); ++i)
      out << "z," << i << ',' << t.z[i] << '\n';
  }
}

Instance load_instance(const std::string& dir) {
  Instance inst;
  inst.X = csv::read_matrix(dir + "/X.csv");
  inst.y = csv::read_vector(dir + "/y.csv");
  if (inst.y.size() != inst.X.rows())
    throw std::runtime_error("X.csv and y.csv row counts differ");
  const std::string truth_path = dir + "/truth.csv";
  if (std::filesystem::exists(truth_path)) {
    GroundTruth t;
    t.beta1 = Vector::Zero(inst.X.cols());
    t.beta2 = Vector::Zero(inst.X.cols());
    t.z.assign(static_cast<std::size_t>(inst.X.rows()), -1);
    for (const auto& row : csv::read_rows(truth_path)) {
      if (row.size() != 3) throw std::runtime_error("bad truth.csv row");
      const long idx = std::stol(row[1]);
      if (row[0] == "beta1") {
        t.beta1[idx] = std::stod(row[2]);
      } else if (row[0] == "beta2") {
        t.beta2[idx] = std::stod(row[2]);
      } else if (row[0] == "z") {
        t.z[static_cast<std::size_t>(idx)] = std::stoi(row[2]);
      } else {
        throw std::runtime_error("unknown truth.csv row kind: " + row[0]);
      }
    }
    int n1 = 0;
    for (std::size_t i = 0; i < t.z.size(); ++i) {
      if (t.z[i] != 0 && t.z[i] != 1) throw std::runtime_error("truth.csv missing z rows");
      n1 += t.z[i];
    }
    inst.n1 = n1;
    inst.n2 = static_cast<int>(t.z.size()) - n1;
    inst.truth = std::move(t);
    const Vector margins = identifiability_margins(inst);
    inst.truth->epsilon_margin = std::max(0.0, margins.minCoeff());
  } else {
    inst.n1 = 0;
    inst.n2 = 0;
  }
  return inst;
}

}  // namespace mixreg
