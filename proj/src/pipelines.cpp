#include "prodgraph/pipelines.hpp"

#include <chrono>
#include <exception>

#include "prodgraph/error.hpp"

namespace prodgraph::pipelines {

namespace {

FactorResult solve_one(SpectralTemplate tmpl, const solver::SolverConfig& cfg) {
  FactorResult out;
  out.factor = tmpl.factor;
  const auto start = std::chrono::steady_clock::now();
  out.result = solver::spectemp_ialm(tmpl, cfg);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.tmpl = std::move(tmpl);
  return out;
}

[[noreturn]] void rethrow_labeled(std::exception_ptr err, int factor) {
  const std::string label = "factor " + std::to_string(factor) + ": ";
  try {
    std::rethrow_exception(err);
  } catch (const solver::DivergenceError& e) {
    throw solver::DivergenceError(label + e.what(), e.last_state());
  } catch (const ValidationError& e) {
    throw ValidationError(label + e.what());
  } catch (const SolverDivergence& e) {
    throw SolverDivergence(label + e.what());
  }
}

SignalBatch with_shape(const SignalBatch& batch, std::vector<Index> dims) {
  return SignalBatch(batch.signals(), std::move(dims));
}

}  // namespace

std::vector<FactorResult> solve_factors(std::vector<SpectralTemplate> templates, const solver::SolverConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<long>(templates.size());
  std::vector<FactorResult> out(templates.size());
  std::vector<std::exception_ptr> errors(templates.size());
#pragma omp parallel for schedule(static)
  for (long f = 0; f < n; ++f) {
    try {
      out[f] = solve_one(std::move(templates[f]), cfg);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (long f = 0; f < n; ++f)
    if (errors[f]) rethrow_labeled(errors[f], static_cast<int>(f + 1));
  return out;
}

std::vector<FactorResult> prodspectemp(const SignalBatch& batch, Index P, Index Q, const solver::SolverConfig& cfg) {
  detail::require(P >= 2 && Q >= 2, "prodspectemp: factor sizes must be >= 2");
  detail::require(P * Q == batch.length(), "prodspectemp: P*Q = " + std::to_string(P * Q) +
                                               " does not match signal length " + std::to_string(batch.length()));
  spectral::FactorTemplates2 t = spectral::factor_templates_2(with_shape(batch, {P, Q}));
  std::vector<SpectralTemplate> templates;
  templates.push_back(std::move(t.P));
  templates.push_back(std::move(t.Q));
  return solve_factors(std::move(templates), cfg);
}

std::vector<FactorResult> ho_prodspectemp(const SignalBatch& batch, std::span<const Index> dims,
                                          const solver::SolverConfig& cfg) {
  detail::require(dims.size() >= 2, "ho_prodspectemp: need at least two factors");
  for (Index p : dims) detail::require(p >= 2, "ho_prodspectemp: factor sizes must be >= 2");
  return solve_factors(spectral::factor_templates_n(with_shape(batch, {dims.begin(), dims.end()})), cfg);
}

std::vector<FactorResult> ho_prodspectemp(std::span<const Tensor> tensors, std::span<const Index> dims,
                                          const solver::SolverConfig& cfg) {
  detail::require(dims.size() >= 2, "ho_prodspectemp: need at least two factors");
  for (Index p : dims) detail::require(p >= 2, "ho_prodspectemp: factor sizes must be >= 2");
  return solve_factors(spectral::factor_templates_n(tensors, dims), cfg);
}

FactorResult hd_spectemp(const SignalBatch& batch, const solver::SolverConfig& cfg) {
  cfg.validate();
  return solve_one(spectral::full_template(batch), cfg);
}

Adjacency normalize_max(const Adjacency& W) {
  const double m = W.nodes() > 0 ? W.weights().maxCoeff() : 0.0;
  if (m <= 0.0) return W;
  return Adjacency(W.weights() / m);
}

Adjacency assemble_product(std::span<const Adjacency> factors, ProductKind kind) {
  std::vector<Adjacency> normalized;
  normalized.reserve(factors.size());
  for (const Adjacency& f : factors) normalized.push_back(normalize_max(f));
  return graphs::graph_product(normalized, kind);
}

std::vector<std::pair<Index, Index>> factor_pairs(Index N) {
  std::vector<std::pair<Index, Index>> out;
  for (Index P = 2; P <= N / 2; ++P)
    if (N % P == 0) out.emplace_back(P, N / P);
  return out;
}

Index factor_path_variables(std::span<const Index> dims) {
  Index total = 0;
  for (Index p : dims) total += solver::optimization_variables(p);
  return total;
}

}  // namespace prodgraph::pipelines
