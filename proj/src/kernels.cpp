#include "prodgraph/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "prodgraph/error.hpp"

namespace prodgraph::kernels {

namespace {

// Fixed upper bound on partial sums held at once; keeps N x N partials bounded for
// large T while staying independent of the thread count.
constexpr Index kMaxSlices = 32;

struct ModeLayout {
  Index inner = 1;  // extent product of faster axes
  Index extent = 1;
  Index outer = 1;  // extent product of slower axes
};

ModeLayout layout_of(const Matrix& X, std::span<const Index> extents, Index axis) {
  detail::require(axis >= 0 && axis < static_cast<Index>(extents.size()), "mode_gram: axis out of range");
  ModeLayout l;
  Index total = 1;
  for (Index a = 0; a < static_cast<Index>(extents.size()); ++a) {
    detail::require(extents[a] >= 1, "mode_gram: zero extent");
    total *= extents[a];
    if (a < axis) l.inner *= extents[a];
    if (a > axis) l.outer *= extents[a];
  }
  l.extent = extents[axis];
  detail::require(total == X.rows(), "mode_gram: extents do not multiply to the signal length");
  return l;
}

struct Slice {
  Index begin;
  Index end;
};

std::vector<Slice> slices_for(Index cols) {
  const Index chunks = (cols + kChunk - 1) / kChunk;
  const Index count = std::max<Index>(1, std::min(chunks, kMaxSlices));
  const Index per = (chunks + count - 1) / count;
  std::vector<Slice> out;
  for (Index c = 0; c < chunks; c += per)
    out.push_back({c * kChunk, std::min(cols, (c + per) * kChunk)});
  if (out.empty()) out.push_back({0, cols});
  return out;
}

// Gram contribution of columns [begin, end), processed kChunk columns at a time.
void accumulate_gram(const Matrix& X, const ModeLayout& l, Index begin, Index end, Matrix& G) {
  for (Index t0 = begin; t0 < end; t0 += kChunk) {
    const Index count = std::min(kChunk, end - t0);
    const double* base = X.data() + t0 * X.rows();
    if (l.inner == 1) {
      Eigen::Map<const Matrix> M(base, l.extent, l.outer * count);
      G.noalias() += M * M.transpose();
    } else {
      const Index slab = l.inner * l.extent;
      for (Index s = 0; s < l.outer * count; ++s) {
        Eigen::Map<const Matrix> B(base + s * slab, l.inner, l.extent);
        G.noalias() += B.transpose() * B;
      }
    }
  }
}

}  // namespace

Matrix mode_gram_serial(const Matrix& X, std::span<const Index> extents, Index axis) {
  const ModeLayout l = layout_of(X, extents, axis);
  Matrix G = Matrix::Zero(l.extent, l.extent);
  for (Index t = 0; t < X.cols(); ++t) {
    const double* x = X.data() + t * X.rows();
    for (Index o = 0; o < l.outer; ++o)
      for (Index i = 0; i < l.inner; ++i)
        for (Index j = 0; j < l.extent; ++j) {
          const double xj = x[i + j * l.inner + o * l.inner * l.extent];
          for (Index k = 0; k < l.extent; ++k) G(j, k) += xj * x[i + k * l.inner + o * l.inner * l.extent];
        }
  }
  return G;
}

Matrix mode_gram_parallel(const Matrix& X, std::span<const Index> extents, Index axis) {
  const ModeLayout l = layout_of(X, extents, axis);
  const std::vector<Slice> slices = slices_for(X.cols());
  std::vector<Matrix> partial(slices.size(), Matrix::Zero(l.extent, l.extent));
  const auto n = static_cast<long>(slices.size());
#pragma omp parallel for schedule(static)
  for (long s = 0; s < n; ++s) accumulate_gram(X, l, slices[s].begin, slices[s].end, partial[s]);
  Matrix G = Matrix::Zero(l.extent, l.extent);
  for (const Matrix& p : partial) G += p;
  return 0.5 * (G + G.transpose());
}

namespace {

void check_filter(const Matrix& W, std::span<const double> h, const Matrix& Y) {
  detail::require(W.rows() == W.cols(), "filter: shift operator is not square");
  detail::require(W.cols() == Y.rows(), "filter: signal length does not match graph size");
  detail::require(!h.empty(), "filter: no coefficients");
}

Matrix horner(const Matrix& W, std::span<const double> h, const Eigen::Ref<const Matrix>& Y) {
  Matrix X = h.back() * Y;
  for (auto l = static_cast<long>(h.size()) - 2; l >= 0; --l) {
    Matrix next = W * X;
    next += h[l] * Y;
    X = std::move(next);
  }
  return X;
}

}  // namespace

Matrix filter_serial(const Matrix& W, std::span<const double> h, const Matrix& Y) {
  check_filter(W, h, Y);
  return horner(W, h, Y);
}

Matrix filter_parallel(const Matrix& W, std::span<const double> h, const Matrix& Y) {
  check_filter(W, h, Y);
  const std::vector<Slice> slices = slices_for(Y.cols());
  Matrix X(Y.rows(), Y.cols());
  const auto n = static_cast<long>(slices.size());
#pragma omp parallel for schedule(static)
  for (long s = 0; s < n; ++s) {
    const Index width = slices[s].end - slices[s].begin;
    X.middleCols(slices[s].begin, width) = horner(W, h, Y.middleCols(slices[s].begin, width));
  }
  return X;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace prodgraph::kernels
