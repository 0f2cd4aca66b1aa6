#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>

#include "mixreg/lifting.hpp"
#include "mixreg/rng.hpp"

using namespace mixreg;

namespace {

// Exactly feasible random state: t uniform, W and U PSD with unit corner.
LiftedState random_feasible_state(Rng& rng, int d, int n) {
  LiftedState s;
  s.t.resize(n);
  for (int i = 0; i < n; ++i) s.t[i] = rng.uniform(-1.0, 1.0);
  auto random_psd = [&rng, d]() {
    Matrix b(d + 1, d + 1);
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j) b(i, j) = rng.normal();
    Matrix m = b * b.transpose();
    return Matrix(m / m(d, d));
  };
  s.W = random_psd();
  s.U = random_psd();
  return s;
}

double dense_objective(const LiftedState& s, const LiftedData& data,
                       double l1, double l2) {
  double f = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const Matrix si = data.dense_S(i);
    f += 0.5 * (si.cwiseProduct(s.W + s.U)).sum() +
         0.5 * s.t[i] * (si.cwiseProduct(s.W - s.U)).sum();
  }
  return f + l1 * s.W.cwiseAbs().sum() + l2 * s.U.cwiseAbs().sum();
}

}  // namespace

TEST_SUITE_BEGIN("lifting");

TEST_CASE("rank-1 data matrices from unit vectors") {
  Instance inst;
  inst.X.resize(1, 2);
  inst.X << 1.0, 0.0;  // X_1 = e1
  inst.y.resize(1);
  inst.y << 1.0;
  inst.n1 = 1;
  inst.n2 = 0;
  const LiftedData data = LiftedData::build(inst);
  Matrix expect(3, 3);
  expect << 1, 0, -1, 0, 0, 0, -1, 0, 1;
  CHECK((data.dense_S(0) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("data matrices are PSD and rank one") {
  const Instance inst = generate(5, 2, 2, 6, 6, 0.1, CovSpec::identity(), 3);
  const LiftedData data = LiftedData::build(inst);
  for (int i = 0; i < data.n(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(data.dense_S(i));
    const Vector ev = es.eigenvalues();
    CHECK(ev.minCoeff() >= -1e-12 * (1.0 + ev.cwiseAbs().maxCoeff()));
    // all but the top eigenvalue vanish
    for (Eigen::Index k = 0; k + 1 < ev.size(); ++k)
      CHECK(std::abs(ev[k]) <= 1e-10 * (1.0 + ev.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("inner products with PSD matrices are nonnegative and match dense traces") {
  Rng rng(5);
  const Instance inst = generate(4, 2, 2, 8, 8, 0.2, CovSpec::identity(), 9);
  const LiftedData data = LiftedData::build(inst);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix b(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) b(i, j) = rng.normal();
    const Matrix psd = b * b.transpose();
    for (int i = 0; i < data.n(); ++i) {
      const double fast = data.quad_form(i, psd);
      const double dense = (data.dense_S(i).cwiseProduct(psd)).sum();
      CHECK(fast == doctest::Approx(dense).epsilon(1e-10));
      CHECK(fast >= 0.0);
    }
  }
}

TEST_CASE("residual identity <S_i, lift(beta)> = (X_i'beta - y_i)^2") {
  Rng rng(8);
  const Instance inst = generate(6, 3, 3, 10, 10, 0.3, CovSpec::identity(), 4);
  const LiftedData data = LiftedData::build(inst);
  for (int trial = 0; trial < 20; ++trial) {
    Vector beta(6);
    for (int j = 0; j < 6; ++j) beta[j] = rng.normal();
    const Matrix lifted = lift(beta);
    for (int i = 0; i < data.n(); ++i) {
      const double direct = std::pow(inst.X.row(i).dot(beta) - inst.y[i], 2);
      const double via_quad = data.quad_form(i, lifted);
      const double via_resid = data.residual_sq(i, beta);
      CHECK(via_quad == doctest::Approx(direct).epsilon(1e-10));
      CHECK(via_resid == doctest::Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("objective with t = 1 reduces to component-1 residuals") {
  Rng rng(2);
  const Instance inst = generate(4, 2, 2, 7, 7, 0.1, CovSpec::identity(), 6);
  const LiftedData data = LiftedData::build(inst);
  Vector beta(4);
  for (int j = 0; j < 4; ++j) beta[j] = rng.normal();
  LiftedState s = random_feasible_state(rng, 4, inst.n());
  s.t.setOnes();
  s.W = lift(beta);
  double expect = 0.0;
  for (int i = 0; i < inst.n(); ++i)
    expect += std::pow(inst.y[i] - inst.X.row(i).dot(beta), 2);
  CHECK(smooth_objective(s, data) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("lifted ground truth has zero smooth objective on noiseless data") {
  const Instance inst = generate(5, 2, 2, 9, 9, 0.0, CovSpec::identity(), 13);
  const LiftedData data = LiftedData::build(inst);
  LiftedState s;
  s.t.resize(inst.n());
  for (int i = 0; i < inst.n(); ++i)
    s.t[i] = inst.truth->z[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  s.W = lift(inst.truth->beta1);
  s.U = lift(inst.truth->beta2);
  CHECK(std::abs(smooth_objective(s, data)) <= 1e-10 * inst.n());
}

TEST_CASE("objective matches a dense term-by-term evaluation") {
  Rng rng(21);
  const Instance inst = generate(5, 2, 2, 8, 8, 0.2, CovSpec::identity(), 17);
  const LiftedData data = LiftedData::build(inst);
  for (int trial = 0; trial < 5; ++trial) {
    const LiftedState s = random_feasible_state(rng, 5, inst.n());
    const double fast = objective(s, data, 0.3, 0.7);
    const double dense = dense_objective(s, data, 0.3, 0.7);
    CHECK(fast == doctest::Approx(dense).epsilon(1e-10));
  }
}

TEST_CASE("lifted objective at a rank-1 state equals the unlifted objective") {
  Rng rng(33);
  const Instance inst = generate(6, 2, 2, 12, 12, 0.1, CovSpec::identity(), 23);
  const LiftedData data = LiftedData::build(inst);
  Vector b1(6), b2(6);
  for (int j = 0; j < 6; ++j) {
    b1[j] = rng.normal();
    b2[j] = rng.normal();
  }
  LiftedState s;
  s.t.resize(inst.n());
  Labels z(static_cast<std::size_t>(inst.n()));
  for (int i = 0; i < inst.n(); ++i) {
    z[static_cast<std::size_t>(i)] = rng.next_u64() & 1u;
    s.t[i] = z[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
  }
  s.W = lift(b1);
  s.U = lift(b2);
  const double l1 = 0.4, l2 = 0.9;
  double expect = 0.0;
  for (int i = 0; i < inst.n(); ++i) {
    const Vector& beta = z[static_cast<std::size_t>(i)] ? b1 : b2;
    expect += std::pow(inst.y[i] - inst.X.row(i).dot(beta), 2);
  }
  expect += l1 * std::pow(b1.lpNorm<1>() + 1.0, 2) + l2 * std::pow(b2.lpNorm<1>() + 1.0, 2);
  CHECK(objective(s, data, l1, l2) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("invexity gap is nonnegative and equals f at the first argument") {
  Rng rng(44);
  const Instance inst = generate(5, 2, 2, 4, 4, 0.15, CovSpec::identity(), 29);
  const LiftedData data = LiftedData::build(inst);
  double min_gap = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const LiftedState a = random_feasible_state(rng, 5, inst.n());
    const LiftedState b = random_feasible_state(rng, 5, inst.n());
    const double gap = invexity_gap(a, b, data);
    min_gap = std::min(min_gap, gap);
    CHECK(gap == doctest::Approx(smooth_objective(a, data)).epsilon(1e-9));
  }
  CHECK(min_gap >= -1e-9);
  const LiftedState a = random_feasible_state(rng, 5, inst.n());
  CHECK(invexity_gap(a, a, data) ==
        doctest::Approx(smooth_objective(a, data)).epsilon(1e-9));
}

TEST_CASE("extraction inverts lift") {
  Rng rng(55);
  Vector beta(7);
  for (int j = 0; j < 7; ++j) beta[j] = rng.normal();
  LiftedState s;
  s.t = Vector::Zero(3);
  s.W = lift(beta);
  s.U = lift(Vector::Zero(7));
  const ExtractedSolution ext = extract_solution(s);
  CHECK(ext.w_rank1);
  CHECK((ext.beta1 - beta).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(ext.beta2.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extraction tolerates tiny diagonal perturbations") {
  Rng rng(56);
  Vector beta(5);
  for (int j = 0; j < 5; ++j) beta[j] = rng.normal();
  LiftedState s;
  s.t = Vector::Zero(2);
  s.W = lift(beta) + 1e-12 * Matrix::Identity(6, 6);
  s.U = lift(beta);
  const ExtractedSolution ext = extract_solution(s);
  CHECK((ext.beta1 - beta).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("extraction maps t signs to labels") {
  LiftedState s;
  s.t.resize(5);
  s.t << -1.0, 1.0, 0.0, -0.2, 0.7;
  s.W = lift(Vector::Ones(2));
  s.U = lift(Vector::Ones(2));
  const ExtractedSolution ext = extract_solution(s);
  CHECK(ext.z == Labels{0, 1, 1, 0, 1});
}

TEST_CASE("extraction fails explicitly on a vanishing corner") {
  LiftedState s;
  s.t = Vector::Zero(1);
  s.W = Matrix::Zero(3, 3);
  s.W(0, 0) = 1.0;  // rank-1 but corner 0
  s.U = lift(Vector::Ones(2));
  CHECK_THROWS_AS(extract_solution(s), std::runtime_error);
}

TEST_CASE("rank-deficient states fall back to the top eigenpair with a warning") {
  Vector b1(3), b2(3);
  b1 << 1.0, 2.0, -1.0;
  b2 << 0.5, -0.5, 2.0;
  LiftedState s;
  s.t = Vector::Zero(1);
  s.W = 0.7 * lift(b1) + 0.3 * lift(b2);  // rank 2
  s.W /= s.W(3, 3);
  s.U = lift(b2);
  const ExtractedSolution ext = extract_solution(s);
  CHECK_FALSE(ext.w_rank1);
  CHECK(ext.u_rank1);
  CHECK(ext.beta1.size() == 3);
}

TEST_CASE("non-finite objective reports the offending sample") {
  const Instance inst = generate(3, 1, 1, 2, 2, 0.0, CovSpec::identity(), 1);
  const LiftedData data = LiftedData::build(inst);
  LiftedState s;
  s.t = Vector::Zero(inst.n());
  s.W = lift(Vector::Ones(3)) * 1e308;
  s.W(3, 3) = 1.0;
  s.U = lift(Vector::Ones(3));
  CHECK_THROWS_AS(objective(s, data, 1.0, 1.0), NumericOverflowError);
}

TEST_CASE("feasibility checks") {
  Rng rng(61);
  LiftedState s = random_feasible_state(rng, 4, 6);
  CHECK(is_feasible(s));
  CHECK(feasibility_violation(s) <= 1e-12);
  s.t[0] = 1.5;
  CHECK_FALSE(is_feasible(s));
  s.t[0] = 0.0;
  s.W(4, 4) = 2.0;
  CHECK_FALSE(is_feasible(s));
}

TEST_CASE("state csv round trip") {
  Rng rng(71);
  const LiftedState s = random_feasible_state(rng, 3, 4);
  save_state(s, ".");
  const LiftedState back = load_state(".");
  CHECK((s.W - back.W).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.U - back.U).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.t - back.t).cwiseAbs().maxCoeff() == 0.0);
  std::remove("state_t.csv");
  std::remove("state_W.csv");
  std::remove("state_U.csv");
}

TEST_SUITE_END();
