#include "prodgraph/spectral.hpp"

#include <cmath>

#include "prodgraph/error.hpp"
#include "prodgraph/kernels.hpp"

namespace prodgraph::spectral {

namespace {

bool has_repeats(const Vector& sorted) {
  const double scale = sorted.cwiseAbs().maxCoeff();
  for (Index i = 1; i < sorted.size(); ++i)
    if (sorted[i] - sorted[i - 1] < 1e-8 * scale) return true;
  return false;
}

}  // namespace

SpectralTemplate template_from_covariance(const Matrix& C, TemplateSource source, int factor) {
  linalg::EvdResult evd = linalg::sym_evd(C);
  SpectralTemplate t;
  t.source = source;
  t.factor = factor;
  t.degenerate_spectrum = has_repeats(evd.lambda);
  t.V = std::move(evd.V);
  t.covariance_eigenvalues = std::move(evd.lambda);
  return t;
}

SpectralTemplate true_template(const Adjacency& W) {
  linalg::EvdResult evd = linalg::sym_evd(W.weights());
  SpectralTemplate t;
  t.degenerate_spectrum = has_repeats(evd.lambda);
  t.V = std::move(evd.V);
  t.source = TemplateSource::True;
  return t;
}

Matrix sample_second_moment(std::span<const Matrix> Ms) {
  detail::require(!Ms.empty(), "sample_second_moment: empty list");
  Matrix C = Matrix::Zero(Ms[0].rows(), Ms[0].rows());
  for (const Matrix& M : Ms) {
    detail::require(M.rows() == Ms[0].rows() && M.cols() == Ms[0].cols(),
                    "sample_second_moment: matrices differ in shape");
    C.noalias() += M * M.transpose();
  }
  C /= static_cast<double>(Ms.size());
  return 0.5 * (C + C.transpose());
}

Matrix mode_unfold(const Tensor& t, Index mode) {
  detail::require(mode >= 1 && mode <= t.axes(), "mode_unfold: mode out of range");
  detail::require(static_cast<Index>(t.data.size()) == t.size(), "mode_unfold: data does not match shape");
  const Index axis = mode - 1;
  const Index extent = t.shape[axis];
  const Index inner = t.stride(axis);
  const Index outer = t.size() / (inner * extent);
  Matrix U(extent, inner * outer);
  for (Index o = 0; o < outer; ++o)
    for (Index j = 0; j < extent; ++j)
      for (Index i = 0; i < inner; ++i) U(j, i + o * inner) = t.data[i + j * inner + o * inner * extent];
  return U;
}

Tensor mode_fold(const Matrix& unfolded, std::vector<Index> shape, Index mode) {
  Tensor t{std::move(shape), {}};
  detail::require(mode >= 1 && mode <= t.axes(), "mode_fold: mode out of range");
  const Index axis = mode - 1;
  const Index extent = t.shape[axis];
  const Index inner = t.stride(axis);
  const Index outer = t.size() / (inner * extent);
  detail::require(unfolded.rows() == extent && unfolded.cols() == inner * outer, "mode_fold: shape mismatch");
  t.data.resize(static_cast<std::size_t>(t.size()));
  for (Index o = 0; o < outer; ++o)
    for (Index j = 0; j < extent; ++j)
      for (Index i = 0; i < inner; ++i) t.data[i + j * inner + o * inner * extent] = unfolded(j, i + o * inner);
  return t;
}

Matrix mode_second_moment(const SignalBatch& batch, Index mode) {
  const std::vector<Index> extents = batch.extents();
  detail::require(mode >= 1 && mode <= static_cast<Index>(extents.size()), "mode_second_moment: mode out of range");
  Matrix G = kernels::mode_gram_parallel(batch.signals(), extents, mode - 1);
  return G / static_cast<double>(batch.count());
}

FactorTemplates2 factor_templates_2(const SignalBatch& batch) {
  detail::require(batch.shape().size() == 2, "factor_templates_2: batch must have exactly two factors");
  // Mode 1 of the Q x P matrix is Q; mode 2 is P.
  return {template_from_covariance(mode_second_moment(batch, 2), TemplateSource::Factor, 1),
          template_from_covariance(mode_second_moment(batch, 1), TemplateSource::Factor, 2)};
}

std::vector<SpectralTemplate> factor_templates_n(const SignalBatch& batch) {
  const auto n = static_cast<Index>(batch.shape().size());
  detail::require(n >= 2, "factor_templates_n: need at least two factors");
  std::vector<SpectralTemplate> out(static_cast<std::size_t>(n));
  for (Index mode = 1; mode <= n; ++mode) {
    const Index factor = factor_of_mode(mode, n);
    out[factor - 1] = template_from_covariance(mode_second_moment(batch, mode), TemplateSource::Factor,
                                               static_cast<int>(factor));
  }
  return out;
}

std::vector<SpectralTemplate> factor_templates_n(std::span<const Tensor> tensors, std::span<const Index> dims) {
  detail::require(!tensors.empty(), "factor_templates_n: no tensors");
  const std::vector<Index> expected(dims.rbegin(), dims.rend());
  Index N = 1;
  for (Index p : dims) N *= p;
  Matrix X(N, static_cast<Index>(tensors.size()));
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    detail::require(tensors[t].shape == expected, "factor_templates_n: tensor shape does not match factor sizes");
    X.col(static_cast<Index>(t)) = diffusion::vec(tensors[t]);
  }
  return factor_templates_n(SignalBatch(std::move(X), {dims.begin(), dims.end()}));
}

SpectralTemplate full_template(const SignalBatch& batch) {
  const Index N = batch.length();
  const Index extents[] = {N};
  Matrix C = kernels::mode_gram_parallel(batch.signals(), extents, 0) / static_cast<double>(batch.count());
  return template_from_covariance(C, TemplateSource::Full);
}

}  // namespace prodgraph::spectral
