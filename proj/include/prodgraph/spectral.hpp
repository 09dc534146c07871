#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "prodgraph/diffusion.hpp"
#include "prodgraph/graphs.hpp"
#include "prodgraph/linalg.hpp"
#include "prodgraph/tensor.hpp"

namespace prodgraph {

enum class TemplateSource { Full, Factor, True };

// Orthonormal eigenbasis handed to the solver.
struct SpectralTemplate {
  Matrix V;
  TemplateSource source = TemplateSource::True;
  int factor = 0;  // 1-based factor index for TemplateSource::Factor
  // Eigenvalues of the covariance V was extracted from; empty for true templates.
  std::optional<Vector> covariance_eigenvalues;
  // Set when two covariance eigenvalues are closer than 1e-8 * ||C||; the basis of that
  // eigenspace is then not identifiable.
  bool degenerate_spectrum = false;

  Index nodes() const { return V.rows(); }
};

namespace spectral {

// Eigenvectors of a covariance, with the degeneracy diagnostic.
SpectralTemplate template_from_covariance(const Matrix& C, TemplateSource source, int factor = 0);

// Eigenvectors of the adjacency itself.
SpectralTemplate true_template(const Adjacency& W);

// (1/T) sum_t M_t M_t^T
Matrix sample_second_moment(std::span<const Matrix> Ms);

// Mode-i unfolding, i in [1, axes]: mode-i fibers as columns; remaining axes in
// increasing order with the earliest varying fastest. Axis i of a signal tensor has
// extent P_{n-i+1}.
Matrix mode_unfold(const Tensor& t, Index mode);
Tensor mode_fold(const Matrix& unfolded, std::vector<Index> shape, Index mode);

// (1/T) sum_t X_(mode) X_(mode)^T computed directly on the batch, mode in [1, n].
Matrix mode_second_moment(const SignalBatch& batch, Index mode);

// Factor of the product that mode i of the signal tensor carries: n - i + 1.
constexpr Index factor_of_mode(Index mode, Index n) { return n - mode + 1; }

struct FactorTemplates2 {
  SpectralTemplate P;  // from (1/T) sum X_t^T X_t
  SpectralTemplate Q;  // from (1/T) sum X_t X_t^T
};

// Two-factor extraction for a batch of shape [P, Q].
FactorTemplates2 factor_templates_2(const SignalBatch& batch);

// n-factor extraction; element f-1 of the result is the template of factor f.
std::vector<SpectralTemplate> factor_templates_n(const SignalBatch& batch);
std::vector<SpectralTemplate> factor_templates_n(std::span<const Tensor> tensors, std::span<const Index> dims);

// Full N x N covariance eigenbasis.
SpectralTemplate full_template(const SignalBatch& batch);

}  // namespace spectral
}  // namespace prodgraph
