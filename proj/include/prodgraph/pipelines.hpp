#pragma once

#include <span>
#include <utility>
#include <vector>

#include "prodgraph/diffusion.hpp"
#include "prodgraph/graphs.hpp"
#include "prodgraph/solver.hpp"
#include "prodgraph/spectral.hpp"
#include "prodgraph/tensor.hpp"

namespace prodgraph::pipelines {

struct FactorResult {
  int factor = 0;  // 1-based
  SpectralTemplate tmpl;
  solver::LearnResult result;
  double seconds = 0.0;
};

// Learns P and Q factors from signals on a P x Q product (x_t = vec(X_t), X_t is Q x P).
// Element 0 is factor P, element 1 factor Q.
std::vector<FactorResult> prodspectemp(const SignalBatch& batch, Index P, Index Q, const solver::SolverConfig& cfg = {});

// n-factor version: mode i of the signal tensor yields factor n - i + 1.
// Element f-1 is factor f.
std::vector<FactorResult> ho_prodspectemp(const SignalBatch& batch, std::span<const Index> dims,
                                          const solver::SolverConfig& cfg = {});
std::vector<FactorResult> ho_prodspectemp(std::span<const Tensor> tensors, std::span<const Index> dims,
                                          const solver::SolverConfig& cfg = {});

// Single solve on the full N x N covariance template.
FactorResult hd_spectemp(const SignalBatch& batch, const solver::SolverConfig& cfg = {});

// W / max(W); the zero graph is returned unchanged.
Adjacency normalize_max(const Adjacency& W);

// Product of the max-normalized factors.
Adjacency assemble_product(std::span<const Adjacency> factors, ProductKind kind);

// All ordered (P, Q) with P * Q = N and P, Q >= 2.
std::vector<std::pair<Index, Index>> factor_pairs(Index N);

// Optimization variables of the factor path: sum over factors of P(P-1)/2 + P.
Index factor_path_variables(std::span<const Index> dims);

// Solves one template per factor, in parallel when OpenMP allows. Solver failures are
// rethrown with the factor number in the message and the original exception type.
std::vector<FactorResult> solve_factors(std::vector<SpectralTemplate> templates, const solver::SolverConfig& cfg);

}  // namespace prodgraph::pipelines
