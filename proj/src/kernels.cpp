#include "mixreg/kernels.hpp"

#include <stdexcept>

namespace mixreg::kernels {

namespace {

inline Eigen::Index num_chunks(Eigen::Index n) {
  return (n + kChunk - 1) / kChunk;
}

}  // namespace

void quad_forms(const Matrix& V, const Matrix& M, Vector& out, Exec exec) {
  const Eigen::Index n = V.cols();
  out.resize(n);
  // Independent writes per index; no reduction involved.
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      out[i] = V.col(i).dot(M * V.col(i));
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      out[i] = V.col(i).dot(M * V.col(i));
    }
  }
}

double weighted_quad_sum(const Matrix& V, const Vector& c, const Matrix& M,
                         Exec exec) {
  const Eigen::Index n = V.cols();
  if (c.size() != n) throw std::invalid_argument("weighted_quad_sum: size mismatch");
  const Eigen::Index nc = num_chunks(n);
  Vector partial = Vector::Zero(nc);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (Eigen::Index ch = 0; ch < nc; ++ch) {
    const Eigen::Index lo = ch * kChunk;
    const Eigen::Index hi = std::min(lo + kChunk, n);
    double acc = 0.0;
    for (Eigen::Index i = lo; i < hi; ++i) {
      acc += c[i] * V.col(i).dot(M * V.col(i));
    }
    partial[ch] = acc;
  }
  double total = 0.0;
  for (Eigen::Index ch = 0; ch < nc; ++ch) total += partial[ch];
  return total;
}

Matrix weighted_gram(const Matrix& V, const Vector& c, Exec exec) {
  const Eigen::Index n = V.cols();
  const Eigen::Index p = V.rows();
  if (c.size() != n) throw std::invalid_argument("weighted_gram: size mismatch");
  const Eigen::Index nc = num_chunks(n);
  std::vector<Matrix> partial(nc);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (Eigen::Index ch = 0; ch < nc; ++ch) {
    const Eigen::Index lo = ch * kChunk;
    const Eigen::Index hi = std::min(lo + kChunk, n);
    Matrix acc = Matrix::Zero(p, p);
    for (Eigen::Index i = lo; i < hi; ++i) {
      acc.noalias() += c[i] * (V.col(i) * V.col(i).transpose());
    }
    partial[ch] = std::move(acc);
  }
  Matrix total = Matrix::Zero(p, p);
  for (Eigen::Index ch = 0; ch < nc; ++ch) total += partial[ch];
  return total;
}

Matrix mean_gram_rows(const Matrix& X, const std::vector<int>& rows, Exec exec) {
  const Eigen::Index p = X.cols();
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) return Matrix::Zero(p, p);
  const Eigen::Index nc = num_chunks(n);
  std::vector<Matrix> partial(nc);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (Eigen::Index ch = 0; ch < nc; ++ch) {
    const Eigen::Index lo = ch * kChunk;
    const Eigen::Index hi = std::min(lo + kChunk, n);
    Matrix acc = Matrix::Zero(p, p);
    for (Eigen::Index i = lo; i < hi; ++i) {
      acc.noalias() += X.row(rows[static_cast<std::size_t>(i)]).transpose() *
                       X.row(rows[static_cast<std::size_t>(i)]);
    }
    partial[ch] = std::move(acc);
  }
  Matrix total = Matrix::Zero(p, p);
  for (Eigen::Index ch = 0; ch < nc; ++ch) total += partial[ch];
  return total / static_cast<double>(n);
}

}  // namespace mixreg::kernels
