#include <doctest.h>

#include <cmath>

#include "mixreg/penalized.hpp"
#include "mixreg/rng.hpp"

using namespace mixreg;

namespace {

Matrix random_design(Rng& rng, int m, int k) {
  Matrix x(m, k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) x(i, j) = rng.normal();
  return x;
}

double objective_at(const PenalizedProblem& p, const Vector& beta) {
  return (p.y - p.X * beta).squaredNorm() +
         p.lambda * std::pow(beta.lpNorm<1>() + 1.0, 2);
}

// Nelder-Mead on R^k, used as an independent minimizer for tiny problems.
Vector nelder_mead(const PenalizedProblem& p, Vector start, int iters) {
  const int k = static_cast<int>(start.size());
  std::vector<Vector> simplex;
  simplex.push_back(start);
  for (int j = 0; j < k; ++j) {
    Vector v = start;
    v[j] += 0.5;
    simplex.push_back(v);
  }
  auto value = [&](const Vector& v) { return objective_at(p, v); };
  for (int it = 0; it < iters; ++it) {
    std::sort(simplex.begin(), simplex.end(),
              [&](const Vector& a, const Vector& b) { return value(a) < value(b); });
    Vector centroid = Vector::Zero(k);
    for (int j = 0; j < k; ++j) centroid += simplex[static_cast<std::size_t>(j)];
    centroid /= static_cast<double>(k);
    const Vector& worst = simplex.back();
    Vector reflect = centroid + (centroid - worst);
    if (value(reflect) < value(simplex.front())) {
      Vector expand = centroid + 2.0 * (centroid - worst);
      simplex.back() = value(expand) < value(reflect) ? expand : reflect;
    } else if (value(reflect) < value(worst)) {
      simplex.back() = reflect;
    } else {
      Vector contract = centroid + 0.5 * (worst - centroid);
      if (value(contract) < value(worst)) {
        simplex.back() = contract;
      } else {
        for (std::size_t j = 1; j < simplex.size(); ++j)
          simplex[j] = simplex.front() + 0.5 * (simplex[j] - simplex.front());
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(),
            [&](const Vector& a, const Vector& b) { return value(a) < value(b); });
  return simplex.front();
}

}  // namespace

TEST_SUITE_BEGIN("penalized");

TEST_CASE("zero response gives the penalty floor") {
  Rng rng(1);
  PenalizedProblem p;
  p.X = random_design(rng, 10, 3);
  p.y = Vector::Zero(10);
  p.lambda = 0.7;
  const PenalizedSolution s = solve_penalized(p);
  CHECK(s.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.objective == doctest::Approx(0.7));
  CHECK(s.converged);
}

TEST_CASE("huge penalties force the zero solution") {
  Rng rng(2);
  PenalizedProblem p;
  p.X = random_design(rng, 15, 4);
  Vector beta(4);
  beta << 1.0, -2.0, 0.0, 3.0;
  p.y = p.X * beta;
  p.lambda = 1e6 * (p.X.transpose() * p.y).cwiseAbs().maxCoeff();
  const PenalizedSolution s = solve_penalized(p);
  CHECK(s.beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matches an independent minimizer on small problems") {
  Rng rng(3);
  for (int trial = 0; trial < 4; ++trial) {
    PenalizedProblem p;
    p.X = random_design(rng, 20, 3);
    Vector beta(3);
    beta << 1.0, 0.0, -1.5;
    p.y = p.X * beta;
    for (int i = 0; i < 20; ++i) p.y[i] += 0.1 * rng.normal();
    p.lambda = 0.5 + trial;
    const PenalizedSolution s = solve_penalized(p);
    const Vector nm = nelder_mead(p, s.beta + 0.3 * Vector::Random(3), 4000);
    CHECK(s.objective <= objective_at(p, nm) * (1.0 + 1e-6) + 1e-9);
    CHECK(s.objective ==
          doctest::Approx(std::min(s.objective, objective_at(p, nm))).epsilon(1e-6));
  }
}

TEST_CASE("objective is convex along random segments") {
  Rng rng(4);
  PenalizedProblem p;
  p.X = random_design(rng, 12, 5);
  p.y = p.X * Vector::Random(5);
  p.lambda = 1.3;
  for (int trial = 0; trial < 50; ++trial) {
    Vector a(5), b(5);
    for (int j = 0; j < 5; ++j) {
      a[j] = rng.normal();
      b[j] = rng.normal();
    }
    const double theta = rng.uniform(0.0, 1.0);
    const Vector mid = theta * a + (1.0 - theta) * b;
    CHECK(objective_at(p, mid) <=
          theta * objective_at(p, a) + (1.0 - theta) * objective_at(p, b) + 1e-10);
  }
}

TEST_CASE("outer objective never increases across iterations") {
  Rng rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    PenalizedProblem p;
    p.X = random_design(rng, 25, 6);
    Vector beta = Vector::Zero(6);
    beta[0] = 2.0;
    beta[3] = -1.0;
    p.y = p.X * beta;
    for (int i = 0; i < 25; ++i) p.y[i] += 0.05 * rng.normal();
    p.lambda = 0.2 + 0.8 * trial;
    const PenalizedSolution s = solve_penalized(p);
    REQUIRE(s.objective_trace.size() >= 1);
    for (std::size_t k = 1; k < s.objective_trace.size(); ++k)
      CHECK(s.objective_trace[k] <= s.objective_trace[k - 1] + 1e-10);
  }
}

TEST_CASE("solution is invariant to row permutation") {
  Rng rng(6);
  PenalizedProblem p;
  p.X = random_design(rng, 18, 4);
  p.y = p.X * Vector::Random(4);
  for (int i = 0; i < 18; ++i) p.y[i] += 0.1 * rng.normal();
  p.lambda = 0.9;
  const PenalizedSolution s = solve_penalized(p);
  PenalizedProblem q = p;
  const std::vector<int> perm = Rng(7).permutation(18);
  for (int i = 0; i < 18; ++i) {
    q.X.row(i) = p.X.row(perm[static_cast<std::size_t>(i)]);
    q.y[i] = p.y[perm[static_cast<std::size_t>(i)]];
  }
  const PenalizedSolution sq = solve_penalized(q);
  CHECK((s.beta - sq.beta).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("stationarity holds at the returned solution") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    PenalizedProblem p;
    p.X = random_design(rng, 30, 5);
    Vector beta = Vector::Zero(5);
    beta[1] = 1.5;
    beta[4] = -0.7;
    p.y = p.X * beta;
    for (int i = 0; i < 30; ++i) p.y[i] += 0.1 * rng.normal();
    p.lambda = 1.0 + trial;
    const PenalizedSolution s = solve_penalized(p);
    const double kkt_tol =
        1e-7 * (1.0 + (p.X.transpose() * p.y).cwiseAbs().maxCoeff());
    CHECK(stationarity_residual(p, s) <= kkt_tol);
    CHECK(s.z.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    for (Eigen::Index j = 0; j < 5; ++j)
      if (s.beta[j] != 0.0) CHECK(s.z[j] == (s.beta[j] > 0 ? 1.0 : -1.0));
  }
}

TEST_CASE("all-zero design is flagged degenerate") {
  PenalizedProblem p;
  p.X = Matrix::Zero(4, 3);
  p.y = Vector::Ones(4);
  p.lambda = 2.0;
  const PenalizedSolution s = solve_penalized(p);
  CHECK(s.degenerate);
  CHECK(s.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.objective == doctest::Approx(4.0 + 2.0));
  PenalizedProblem empty;
  empty.X = Matrix::Zero(0, 3);
  empty.y = Vector::Zero(0);
  empty.lambda = 1.0;
  CHECK(solve_penalized(empty).degenerate);
}

TEST_CASE("subgradient certificate: full support leaves nothing off") {
  Rng rng(9);
  PenalizedProblem p;
  p.X = random_design(rng, 12, 3);
  p.y = p.X * Vector::Random(3);
  p.lambda = 0.4;
  const PenalizedSolution s = solve_penalized(p);
  const SubgradientCertificate c = subgradient_certificate(p, s, {0, 1, 2});
  CHECK(c.z_off.size() == 0);
  CHECK(c.max_abs_off == 0.0);
}

TEST_CASE("reconstructed subgradient agrees with the solver's") {
  Rng rng(10);
  PenalizedProblem p;
  p.X = random_design(rng, 25, 4);
  Vector beta = Vector::Zero(4);
  beta[0] = 2.0;
  beta[2] = -1.0;
  p.y = p.X * beta;
  for (int i = 0; i < 25; ++i) p.y[i] += 0.05 * rng.normal();
  p.lambda = 1.5;
  const PenalizedSolution s = solve_penalized(p);
  std::vector<int> support;
  for (Eigen::Index j = 0; j < 4; ++j)
    if (s.beta[j] != 0.0) support.push_back(static_cast<int>(j));
  const SubgradientCertificate c = subgradient_certificate(p, s, support);
  // On-support entries must agree with the solver's signs; off-support with
  // the solver's stationarity ratios.
  for (std::size_t j = 0; j < support.size(); ++j)
    CHECK(c.z_on[static_cast<Eigen::Index>(j)] ==
          doctest::Approx(s.z[support[j]]).epsilon(1e-8));
  Eigen::Index off_idx = 0;
  for (Eigen::Index j = 0; j < 4; ++j) {
    if (std::find(support.begin(), support.end(), static_cast<int>(j)) != support.end())
      continue;
    CHECK(c.z_off[off_idx] == doctest::Approx(s.z[j]).epsilon(1e-8));
    ++off_idx;
  }
  CHECK_FALSE(c.hpp_singular);
}

TEST_CASE("singular support gram is flagged") {
  PenalizedProblem p;
  p.X = Matrix::Zero(5, 3);
  p.X.col(0).setOnes();
  p.X.col(1).setOnes();  // duplicate column
  p.X.col(2).setRandom();
  p.y = Vector::Ones(5);
  p.lambda = 1.0;
  const SubgradientCertificate c =
      subgradient_certificate(p, Vector::Zero(3), {0, 1});
  CHECK(c.hpp_singular);
}

TEST_SUITE_END();
