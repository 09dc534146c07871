#pragma once

#include <span>

#include "prodgraph/linalg.hpp"

// Data-parallel kernels. Every kernel has a plain serial reference, kept for tests and
// the benchmark, and an OpenMP version. The OpenMP versions split work into fixed-size
// chunks that do not depend on the thread count and reduce the partial results in chunk
// order, so their output is bit-identical for any number of threads.
namespace prodgraph::kernels {

// Signals per chunk in the parallel reductions.
inline constexpr Index kChunk = 64;

// Sum over the columns x_t of X of the mode Gram matrix: each x_t is a tensor with the
// given axis extents (axis 0 fastest); the result is the sum of X_(axis) X_(axis)^T,
// an extent(axis) x extent(axis) matrix. Not divided by T.
Matrix mode_gram_serial(const Matrix& X, std::span<const Index> extents, Index axis);
Matrix mode_gram_parallel(const Matrix& X, std::span<const Index> extents, Index axis);

// (sum_l h[l] W^l) Y evaluated by Horner's rule.
Matrix filter_serial(const Matrix& W, std::span<const double> h, const Matrix& Y);
Matrix filter_parallel(const Matrix& W, std::span<const double> h, const Matrix& Y);

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace prodgraph::kernels
