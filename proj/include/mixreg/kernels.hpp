#pragma once

#include "mixreg/types.hpp"

namespace mixreg::kernels {

// Execution policy for the data-parallel kernels. Both policies run the same
// fixed-chunk reduction tree, so results are bit-identical between them and
// independent of the OpenMP thread count; `serial` is the reference used by
// tests and the benchmark.
enum class Exec { serial, parallel };

inline constexpr Eigen::Index kChunk = 256;

// q[i] = v_i' M v_i for every column v_i of V. M must be square with
// rows(M) == rows(V).
void quad_forms(const Matrix& V, const Matrix& M, Vector& out, Exec exec);

// sum_i c[i] * (v_i' M v_i)
double weighted_quad_sum(const Matrix& V, const Vector& c, const Matrix& M,
                         Exec exec);

// sum_i c[i] * v_i v_i'
Matrix weighted_gram(const Matrix& V, const Vector& c, Exec exec);

// (1/rows.size()) * sum_{i in rows} x_i x_i' over rows of X.
Matrix mean_gram_rows(const Matrix& X, const std::vector<int>& rows, Exec exec);

}  // namespace mixreg::kernels
