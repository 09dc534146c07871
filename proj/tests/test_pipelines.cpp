#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "prodgraph/analysis.hpp"
#include "prodgraph/error.hpp"
#include "prodgraph/pipelines.hpp"

using namespace prodgraph;

namespace {

const FilterSpec kFilter({1.0, 0.5});

std::vector<Adjacency> factors(std::vector<Index> dims, double p, std::uint64_t seed) {
  std::vector<Adjacency> f;
  for (std::size_t i = 0; i < dims.size(); ++i) f.push_back(graphs::erdos_renyi(dims[i], p, seed * 31 + i));
  return f;
}

bool has_node0_edges(const std::vector<Adjacency>& f) {
  for (const Adjacency& a : f)
    if (a.weights().row(0).sum() == 0.0) return false;
  return true;
}

// Signals on factors ordered `to` from signals on factors ordered `from`, where `perm[k]`
// is the position in `from` of factor k of `to`.
Matrix permute_axes(const Matrix& X, const std::vector<Index>& from, const std::vector<Index>& perm) {
  const Index n = static_cast<Index>(from.size());
  std::vector<Index> to(n);
  for (Index k = 0; k < n; ++k) to[k] = from[perm[k]];
  Matrix Y(X.rows(), X.cols());
  std::vector<Index> idx(n);  // factor indices in `from` order
  for (Index u = 0; u < X.rows(); ++u) {
    // the last factor varies fastest
    Index rem = u;
    for (Index f = n - 1; f >= 0; --f) {
      idx[f] = rem % from[f];
      rem /= from[f];
    }
    Index v = 0;
    for (Index k = 0; k < n; ++k) v = v * to[k] + idx[perm[k]];
    Y.row(v) = X.row(u);
  }
  return Y;
}

}  // namespace

TEST_CASE("factor pairs and variable counts") {
  const auto pairs = pipelines::factor_pairs(150);
  CHECK(std::find(pairs.begin(), pairs.end(), std::pair<Index, Index>{15, 10}) != pairs.end());
  CHECK(std::find(pairs.begin(), pairs.end(), std::pair<Index, Index>{10, 15}) != pairs.end());
  for (auto [p, q] : pairs) CHECK(p * q == 150);
  CHECK(pipelines::factor_pairs(7).empty());
  const Index dims[] = {15, 10};
  CHECK(pipelines::factor_path_variables(dims) == 105 + 15 + 45 + 10);
}

TEST_CASE("assemble product") {
  const auto f = factors({4, 3}, 0.6, 1);
  CHECK(pipelines::assemble_product(f, ProductKind::Strong).weights() ==
        graphs::graph_product(f, ProductKind::Strong).weights());
  const Adjacency scaled(3.0 * f[0].weights());
  const Adjacency once = pipelines::normalize_max(scaled);
  CHECK(pipelines::normalize_max(once).weights() == once.weights());
  CHECK(once.weights() == f[0].weights());
  const Adjacency truth = graphs::graph_product(f, ProductKind::Cartesian);
  const std::vector<Adjacency> rescaled{Adjacency(0.2 * f[0].weights()), Adjacency(7.0 * f[1].weights())};
  CHECK(analysis::f1_score(truth, pipelines::assemble_product(rescaled, ProductKind::Cartesian)) == 1.0);
  CHECK(pipelines::normalize_max(Adjacency(Matrix::Zero(3, 3))).weights().isZero(0.0));
}

TEST_CASE("noise-free two-factor recovery") {
  int solved = 0, exact = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    std::vector<Adjacency> f;
    for (Index i = 0; i < 2; ++i)
      f.push_back(graphs::erdos_renyi(5 - i, 0.5, seed * 31 + i, {graphs::EdgeWeights::Mode::Uniform, 0.5, 1.5}));
    if (!has_node0_edges(f)) continue;
    const Adjacency W = graphs::graph_product(f, ProductKind::Cartesian);
    const SignalBatch b = diffusion::generate_diffused(W, kFilter, 100000, seed, {5, 4});
    const auto r = pipelines::prodspectemp(b, 5, 4);
    REQUIRE(r.size() == 2);
    CHECK(r[0].factor == 1);
    CHECK(r[1].factor == 2);
    CHECK(r[0].result.adjacency.nodes() == 5);
    CHECK(r[1].result.adjacency.nodes() == 4);
    for (int k = 0; k < 2; ++k) {
      ++solved;
      exact += analysis::f1_score(f[k], r[k].result.adjacency) == 1.0;
    }
  }
  MESSAGE("exact on " << exact << "/" << solved << " factors");
  CHECK(solved >= 10);
  CHECK(exact * 10 >= solved * 7);
}

TEST_CASE("population templates of every product kind give the same factors") {
  // Kronecker templates see only squared factor eigenvalues under a first-order filter, so
  // factors with a +-lambda pair (any bipartite graph) give repeated template eigenvalues.
  int compared = 0;
  for (std::uint64_t seed = 7; seed < 15 && compared < 3; ++seed) {
    std::vector<Adjacency> f;
    for (Index i = 0; i < 2; ++i)
      f.push_back(graphs::erdos_renyi(5 - i, 0.7, seed * 31 + i, {graphs::EdgeWeights::Mode::Uniform, 0.5, 1.5}));
    std::vector<std::vector<Matrix>> learned;
    bool degenerate = false;
    for (ProductKind kind : {ProductKind::Cartesian, ProductKind::Kronecker, ProductKind::Strong}) {
      const linalg::EvdResult evd = graphs::product_evd(f, kind);
      Vector g(evd.lambda.size());
      for (Index i = 0; i < g.size(); ++i) g[i] = std::pow(kFilter.response(evd.lambda[i]), 2);
      const Matrix C = evd.V * g.asDiagonal() * evd.V.transpose();
      std::vector<SpectralTemplate> t(2);
      t[0] = spectral::template_from_covariance(oracle::partial_trace(C, {4, 5}, 1), TemplateSource::Factor, 1);
      t[1] = spectral::template_from_covariance(oracle::partial_trace(C, {4, 5}, 0), TemplateSource::Factor, 2);
      degenerate = degenerate || t[0].degenerate_spectrum || t[1].degenerate_spectrum;
      if (degenerate) break;
      const auto r = pipelines::solve_factors(t, {});
      learned.push_back({r[0].result.adjacency.weights(), r[1].result.adjacency.weights()});
    }
    if (degenerate) continue;
    ++compared;
    for (std::size_t k = 1; k < learned.size(); ++k)
      for (int i = 0; i < 2; ++i) CHECK((learned[k][i] - learned[0][i]).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(compared >= 2);
}

TEST_CASE("a single signal still runs") {
  const auto f = factors({4, 3}, 0.5, 3);
  const Adjacency W = graphs::graph_product(f, ProductKind::Kronecker);
  const SignalBatch b = diffusion::generate_diffused(W, kFilter, 1, 3, {4, 3});
  solver::SolverConfig cfg;
  cfg.max_iter = 300;
  CHECK_NOTHROW(pipelines::prodspectemp(b, 4, 3, cfg));
  CHECK_THROWS_AS(pipelines::prodspectemp(b, 3, 3, cfg), ValidationError);
}

TEST_CASE("ho with two factors equals prod") {
  const auto f = factors({5, 3}, 0.5, 4);
  const Adjacency W = graphs::graph_product(f, ProductKind::Strong);
  const SignalBatch b = diffusion::generate_diffused(W, kFilter, 2000, 4, {5, 3});
  const auto p = pipelines::prodspectemp(b, 5, 3);
  const Index dims[] = {5, 3};
  const auto h = pipelines::ho_prodspectemp(b, dims);
  for (int k = 0; k < 2; ++k) CHECK(p[k].result.adjacency.weights() == h[k].result.adjacency.weights());

  std::vector<Tensor> tensors;
  for (Index t = 0; t < b.count(); ++t) tensors.push_back(diffusion::reshape_tensor(b.signals().col(t), dims));
  const auto ht = pipelines::ho_prodspectemp(tensors, dims);
  for (int k = 0; k < 2; ++k) CHECK(ht[k].result.adjacency.weights() == h[k].result.adjacency.weights());
}

TEST_CASE("permuting tensor axes permutes the factors") {
  const std::vector<Index> dims{4, 3, 5};
  const auto f = factors(dims, 0.6, 5);
  const Adjacency W = graphs::graph_product(f, ProductKind::Cartesian);
  const SignalBatch b = diffusion::generate_diffused(W, kFilter, 3000, 5, dims);
  const auto r = pipelines::ho_prodspectemp(b, dims);

  const std::vector<Index> perm{2, 0, 1};
  const std::vector<Index> pdims{5, 4, 3};
  const SignalBatch pb(permute_axes(b.signals(), dims, perm), pdims);
  const auto pr = pipelines::ho_prodspectemp(pb, pdims);
  for (Index k = 0; k < 3; ++k)
    CHECK((pr[k].result.adjacency.weights() - r[perm[k]].result.adjacency.weights()).cwiseAbs().maxCoeff() < 1e-8);
  // The permutation helper itself: the permuted signals live on the permuted product.
  const std::vector<Adjacency> pf{f[2], f[0], f[1]};
  const Matrix PW = graphs::graph_product(pf, ProductKind::Cartesian).weights();
  const Matrix moved = permute_axes(W.weights(), dims, perm);
  CHECK(permute_axes(Matrix(moved.transpose()), dims, perm).transpose() == PW);
}

TEST_CASE("hd runs on the full template and agrees with the factor path") {
  const auto f = factors({4, 3}, 0.6, 8);
  const Adjacency W = graphs::graph_product(f, ProductKind::Kronecker);
  const SignalBatch b = diffusion::generate_diffused(W, kFilter, 100000, 8, {4, 3});
  const auto hd = pipelines::hd_spectemp(b);
  CHECK(hd.result.variables == 66 + 12);
  CHECK(hd.result.adjacency.nodes() == 12);
  const auto pr = pipelines::prodspectemp(b, 4, 3);
  const Index dims[] = {4, 3};
  CHECK(pipelines::factor_path_variables(dims) == pr[0].result.variables + pr[1].result.variables);
  const std::vector<Adjacency> learned{pr[0].result.adjacency, pr[1].result.adjacency};
  const Vector a = linalg::vechn(hd.result.adjacency.weights()).entries();
  const Vector c = linalg::vechn(pipelines::assemble_product(learned, ProductKind::Kronecker).weights()).entries();
  MESSAGE("cosine(hd, assembled) = " << a.dot(c) / (a.norm() * c.norm()));
}

TEST_CASE("solver failures carry the factor number") {
  std::vector<SpectralTemplate> t(2);
  t[0].V = Matrix::Identity(3, 3);
  t[0].factor = 1;
  Matrix H(2, 2);
  H << 1, 1, 1, -1;
  t[1].V = Matrix::Zero(3, 3);
  t[1].V.topLeftCorner(2, 2) = 1e200 * H;
  t[1].V(2, 2) = 1.0;
  t[1].factor = 2;
  try {
    pipelines::solve_factors(t, {});
    FAIL("expected divergence");
  } catch (const solver::DivergenceError& e) {
    CHECK(std::string(e.what()).rfind("factor 2: ", 0) == 0);
  }
}
