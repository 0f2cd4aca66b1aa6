#include "mixreg/oracle.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mixreg/csv.hpp"
#include "mixreg/penalized.hpp"
#include "mixreg/rng.hpp"

namespace mixreg {

namespace {

Labels mask_to_labels(std::uint64_t mask, int n) {
  Labels z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
  return z;
}

bool lex_less(const Labels& a, const Labels& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

struct Candidate {
  double objective = std::numeric_limits<double>::infinity();
  std::uint64_t mask = 0;
};

}  // namespace

OracleResult brute_force(const Instance& inst, double lambda1, double lambda2,
                         int n_cap, kernels::Exec exec) {
  const int n = inst.n();
  if (n > n_cap) throw std::invalid_argument("brute_force: n exceeds n_cap");
  if (n < 1) throw std::invalid_argument("brute_force: empty instance");
  const std::uint64_t total = 1ull << n;

  auto evaluate = [&](std::uint64_t mask) {
    PenalizedProblem p1, p2;
    p1.lambda = lambda1;
    p2.lambda = lambda2;
    int m1 = 0;
    for (int i = 0; i < n; ++i) m1 += (mask >> i) & 1u;
    p1.X.resize(m1, inst.d());
    p1.y.resize(m1);
    p2.X.resize(n - m1, inst.d());
    p2.y.resize(n - m1);
    int a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) {
        p1.X.row(a) = inst.X.row(i);
        p1.y[a++] = inst.y[i];
      } else {
        p2.X.row(b) = inst.X.row(i);
        p2.y[b++] = inst.y[i];
      }
    }
    const PenalizedSolution s1 = solve_penalized(p1);
    const PenalizedSolution s2 = solve_penalized(p2);
    return s1.objective + s2.objective;
  };

  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return lex_less(mask_to_labels(a.mask, n), mask_to_labels(b.mask, n));
  };

  const std::uint64_t chunk = 64;
  const std::uint64_t nchunks = (total + chunk - 1) / chunk;
  std::vector<Candidate> best_per_chunk(nchunks);
#pragma omp parallel for schedule(dynamic) if (exec == kernels::Exec::parallel)
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    Candidate best;
    const std::uint64_t lo = static_cast<std::uint64_t>(c) * chunk;
    const std::uint64_t hi = std::min(lo + chunk, total);
    for (std::uint64_t mask = lo; mask < hi; ++mask) {
      Candidate cand{evaluate(mask), mask};
      if (better(cand, best)) best = cand;
    }
    best_per_chunk[static_cast<std::size_t>(c)] = best;
  }
  Candidate best;
  for (const Candidate& cand : best_per_chunk)
    if (better(cand, best)) best = cand;

  OracleResult out;
  out.best_labels = mask_to_labels(best.mask, n);
  out.best_objective = best.objective;
  out.labelings_evaluated = static_cast<long long>(total);
  // Recompute the winning betas.
  PenalizedProblem p1, p2;
  p1.lambda = lambda1;
  p2.lambda = lambda2;
  std::vector<int> r1, r2;
  for (int i = 0; i < n; ++i)
    (out.best_labels[static_cast<std::size_t>(i)] ? r1 : r2).push_back(i);
  auto fill = [&](PenalizedProblem& p, const std::vector<int>& rows) {
    p.X.resize(static_cast<Eigen::Index>(rows.size()), inst.d());
    p.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      p.X.row(static_cast<Eigen::Index>(r)) = inst.X.row(rows[r]);
      p.y[static_cast<Eigen::Index>(r)] = inst.y[rows[r]];
    }
  };
  fill(p1, r1);
  fill(p2, r2);
  out.best_beta1 = solve_penalized(p1).beta;
  out.best_beta2 = solve_penalized(p2).beta;
  return out;
}

std::string oracle_csv_string(const OracleResult& result) {
  std::ostringstream os;
  os << "field,index,value\n";
  os << "objective,," << csv::format(result.best_objective) << '\n';
  os << "labelings_evaluated,," << result.labelings_evaluated << '\n';
  for (std::size_t i = 0; i < result.best_labels.size(); ++i)
    os << "z," << i << ',' << result.best_labels[i] << '\n';
  for (Eigen::Index j = 0; j < result.best_beta1.size(); ++j)
    os << "beta1," << j << ',' << csv::format(result.best_beta1[j]) << '\n';
  for (Eigen::Index j = 0; j < result.best_beta2.size(); ++j)
    os << "beta2," << j << ',' << csv::format(result.best_beta2[j]) << '\n';
  return os.str();
}

void write_oracle_csv(const OracleResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << oracle_csv_string(result);
}

double relaxation_first_order_gap(const Matrix& X, const Vector& y,
                                  const Vector& z, const Vector& b1, const Vector& b2,
                                  const Vector& zbar, const Vector& b1bar,
                                  const Vector& b2bar) {
  const Eigen::Index n = y.size();
  auto value = [&](const Vector& zz, const Vector& v1, const Vector& v2) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r1 = y[i] - X.row(i).dot(v1);
      const double r2 = y[i] - X.row(i).dot(v2);
      acc += zz[i] * r1 * r1 + (1.0 - zz[i]) * r2 * r2;
    }
    return acc;
  };
  const double f = value(z, b1, b2);
  const double fbar = value(zbar, b1bar, b2bar);
  double dz_term = 0.0;
  Vector g1 = Vector::Zero(b1.size());
  Vector g2 = Vector::Zero(b2.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r1 = y[i] - X.row(i).dot(b1bar);
    const double r2 = y[i] - X.row(i).dot(b2bar);
    dz_term += (r1 * r1 - r2 * r2) * (z[i] - zbar[i]);
    g1 -= 2.0 * zbar[i] * r1 * X.row(i).transpose();
    g2 -= 2.0 * (1.0 - zbar[i]) * r2 * X.row(i).transpose();
  }
  return f - fbar - dz_term - g1.dot(b1 - b1bar) - g2.dot(b2 - b2bar);
}

NonconvexityDemo nonconvexity_demo(std::uint64_t seed) {
  Rng rng(seed);
  const int n = 8, d = 2;
  NonconvexityDemo demo;
  demo.X.resize(n, d);
  demo.y.resize(n);
  // Positive design column and positive responses keep the simplified gap
  // sign-determined by the ordering of u2 and w2.
  for (int i = 0; i < n; ++i) {
    demo.X(i, 0) = rng.uniform(0.5, 1.5);
    demo.X(i, 1) = rng.uniform(0.5, 1.5);
    demo.y[i] = rng.uniform(0.5, 1.5);
  }
  demo.coord_beta1 = 0;
  demo.coord_beta2 = 1;

  auto make_choice = [&](double u2, double w2) {
    NonconvexityDemo::Choice c;
    c.u2 = u2;
    c.w2 = w2;
    // w1 chosen so the cross terms of the gap cancel and
    //   F = sum (y - u2 x)^2 - sum (y - w2 x)^2  on the beta2 column.
    const Vector xk = demo.X.col(demo.coord_beta1);
    const Vector xl = demo.X.col(demo.coord_beta2);
    const double target = xl.dot(demo.y) - w2 * xl.squaredNorm();
    c.w1 = (xk.dot(demo.y) - target) / xk.squaredNorm();
    c.u1 = c.w1 - (c.u2 - c.w2);
    Vector z = Vector::Zero(n);
    Vector zbar = Vector::Constant(n, 0.5);
    Vector b1 = Vector::Zero(d), b2 = Vector::Zero(d), b1bar = Vector::Zero(d),
           b2bar = Vector::Zero(d);
    b1[demo.coord_beta1] = c.u1;
    b1bar[demo.coord_beta1] = c.w1;
    b2[demo.coord_beta2] = c.u2;
    b2bar[demo.coord_beta2] = c.w2;
    c.F = relaxation_first_order_gap(demo.X, demo.y, z, b1, b2, zbar, b1bar, b2bar);
    return c;
  };
  demo.plus = make_choice(0.05, 0.15);   // u2 < w2
  demo.minus = make_choice(0.15, 0.05);  // u2 > w2
  return demo;
}

}  // namespace mixreg
