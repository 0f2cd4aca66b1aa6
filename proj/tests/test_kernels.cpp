#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mixreg/kernels.hpp"
#include "mixreg/rng.hpp"

using namespace mixreg;
using kernels::Exec;

namespace {

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("serial and parallel reductions are bit-identical") {
  Rng rng(7);
  const int p = 9, n = 1000;
  const Matrix V = random_matrix(rng, p, n);
  Matrix sym = random_matrix(rng, p, p);
  sym = 0.5 * (sym + sym.transpose());
  Vector c(n);
  for (int i = 0; i < n; ++i) c[i] = rng.uniform(-1.0, 1.0);

  const double s_serial = kernels::weighted_quad_sum(V, c, sym, Exec::serial);
  const double s_par = kernels::weighted_quad_sum(V, c, sym, Exec::parallel);
  CHECK(s_serial == s_par);

  const Matrix g_serial = kernels::weighted_gram(V, c, Exec::serial);
  const Matrix g_par = kernels::weighted_gram(V, c, Exec::parallel);
  CHECK((g_serial - g_par).cwiseAbs().maxCoeff() == 0.0);

  Vector q_serial, q_par;
  kernels::quad_forms(V, sym, q_serial, Exec::serial);
  kernels::quad_forms(V, sym, q_par, Exec::parallel);
  CHECK((q_serial - q_par).cwiseAbs().maxCoeff() == 0.0);

#ifdef _OPENMP
  // Thread count must not change the result.
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Matrix g_one = kernels::weighted_gram(V, c, Exec::parallel);
  omp_set_num_threads(saved);
  CHECK((g_one - g_par).cwiseAbs().maxCoeff() == 0.0);
#endif
}

TEST_CASE("weighted gram matches the dense linear algebra route") {
  Rng rng(11);
  const int p = 6, n = 513;  // deliberately not a multiple of the chunk size
  const Matrix V = random_matrix(rng, p, n);
  Vector c(n);
  for (int i = 0; i < n; ++i) c[i] = rng.uniform(-2.0, 2.0);
  const Matrix direct = V * c.asDiagonal() * V.transpose();
  const Matrix chunked = kernels::weighted_gram(V, c, Exec::parallel);
  const double scale = direct.cwiseAbs().maxCoeff();
  CHECK((direct - chunked).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("weighted quad sum matches plain accumulation") {
  Rng rng(13);
  const int p = 5, n = 300;
  const Matrix V = random_matrix(rng, p, n);
  Matrix sym = random_matrix(rng, p, p);
  sym = 0.5 * (sym + sym.transpose());
  Vector c(n);
  for (int i = 0; i < n; ++i) c[i] = rng.uniform(0.0, 1.0);
  double plain = 0.0;
  for (int i = 0; i < n; ++i) plain += c[i] * V.col(i).dot(sym * V.col(i));
  const double chunked = kernels::weighted_quad_sum(V, c, sym, Exec::parallel);
  CHECK(chunked == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("mean gram over row subsets") {
  Rng rng(17);
  const Matrix X = random_matrix(rng, 40, 4);
  std::vector<int> rows = {0, 3, 5, 17, 39};
  const Matrix g = kernels::mean_gram_rows(X, rows, Exec::parallel);
  Matrix expect = Matrix::Zero(4, 4);
  for (int i : rows) expect += X.row(i).transpose() * X.row(i);
  expect /= static_cast<double>(rows.size());
  CHECK((g - expect).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + expect.cwiseAbs().maxCoeff()));
  CHECK(kernels::mean_gram_rows(X, {}, Exec::parallel).cwiseAbs().maxCoeff() == 0.0);
}

TEST_SUITE_END();
