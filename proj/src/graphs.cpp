#include "prodgraph/graphs.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "prodgraph/error.hpp"

namespace prodgraph {

Adjacency::Adjacency(Matrix W) : W_(std::move(W)) {
  detail::require(W_.rows() == W_.cols(), "adjacency: matrix is not square");
  detail::require(W_.rows() >= 1, "adjacency: empty matrix");
  detail::require(W_.allFinite(), "adjacency: non-finite weight");
  const double tol = 1e-12 * std::max(1.0, W_.cwiseAbs().maxCoeff());
  for (Index i = 0; i < W_.rows(); ++i) {
    detail::require(W_(i, i) == 0.0, "adjacency: nonzero diagonal at node " + std::to_string(i));
    for (Index j = 0; j < i; ++j) {
      detail::require(std::abs(W_(i, j) - W_(j, i)) <= tol, "adjacency: matrix is not symmetric");
      detail::require(W_(i, j) >= 0.0 && W_(j, i) >= 0.0, "adjacency: negative weight");
    }
  }
}

Index Adjacency::edge_count() const {
  Index count = 0;
  for (Index c = 0; c < nodes(); ++c)
    for (Index r = c + 1; r < nodes(); ++r) count += W_(r, c) > 0.0;
  return count;
}

std::string_view to_string(ProductKind kind) {
  switch (kind) {
    case ProductKind::Cartesian: return "cartesian";
    case ProductKind::Kronecker: return "kronecker";
    case ProductKind::Strong: return "strong";
  }
  return "unknown";
}

ProductKind parse_product_kind(std::string_view name) {
  if (name == "cartesian") return ProductKind::Cartesian;
  if (name == "kronecker") return ProductKind::Kronecker;
  if (name == "strong") return ProductKind::Strong;
  throw ValidationError("unknown product kind '" + std::string(name) + "'");
}

namespace graphs {

Adjacency erdos_renyi(Index n, double p, std::uint64_t seed, EdgeWeights weights) {
  detail::require(n >= 2, "erdos_renyi: need n >= 2");
  detail::require(p >= 0.0 && p <= 1.0, "erdos_renyi: p outside [0, 1]");
  if (weights.mode == EdgeWeights::Mode::Uniform)
    detail::require(weights.low > 0.0 && weights.low <= weights.high, "erdos_renyi: bad weight range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> weight(weights.low, weights.high);
  Matrix W = Matrix::Zero(n, n);
  for (Index c = 0; c < n; ++c)
    for (Index r = c + 1; r < n; ++r) {
      if (coin(rng) < p) {
        const double w = weights.mode == EdgeWeights::Mode::Unit ? 1.0 : weight(rng);
        W(r, c) = w;
        W(c, r) = w;
      }
    }
  return Adjacency(std::move(W));
}

Adjacency graph_product(const Adjacency& A, const Adjacency& B, ProductKind kind) {
  const Matrix& a = A.weights();
  const Matrix& b = B.weights();
  const Matrix Ia = Matrix::Identity(a.rows(), a.rows());
  const Matrix Ib = Matrix::Identity(b.rows(), b.rows());
  switch (kind) {
    case ProductKind::Cartesian: return Adjacency(linalg::kron(a, Ib) + linalg::kron(Ia, b));
    case ProductKind::Kronecker: return Adjacency(linalg::kron(a, b));
    case ProductKind::Strong: return Adjacency(linalg::kron(a, Ib) + linalg::kron(Ia, b) + linalg::kron(a, b));
  }
  throw ValidationError("graph_product: unknown kind");
}

Adjacency graph_product(std::span<const Adjacency> factors, ProductKind kind) {
  detail::require(!factors.empty(), "graph_product: no factors");
  Adjacency acc = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) acc = graph_product(acc, factors[i], kind);
  return acc;
}

linalg::EvdResult product_evd(std::span<const Adjacency> factors, ProductKind kind) {
  detail::require(factors.size() >= 2, "product_evd: need at least two factors");
  linalg::EvdResult acc = linalg::sym_evd(factors[0].weights());
  for (std::size_t f = 1; f < factors.size(); ++f) {
    const linalg::EvdResult next = linalg::sym_evd(factors[f].weights());
    Vector lambda(acc.lambda.size() * next.lambda.size());
    for (Index i = 0; i < acc.lambda.size(); ++i)
      for (Index j = 0; j < next.lambda.size(); ++j) {
        const double a = acc.lambda[i];
        const double b = next.lambda[j];
        double v = 0.0;
        switch (kind) {
          case ProductKind::Cartesian: v = a + b; break;
          case ProductKind::Kronecker: v = a * b; break;
          case ProductKind::Strong: v = a + b + a * b; break;
        }
        lambda[i * next.lambda.size() + j] = v;
      }
    acc = {linalg::kron(acc.V, next.V), std::move(lambda)};
  }
  return acc;
}

Matrix read_square_matrix(std::istream& in) {
  long long n = 0;
  if (!(in >> n) || n < 1) throw IoError("matrix file: missing or invalid node count");
  Matrix M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (!(in >> M(i, j))) throw IoError("matrix file: expected " + std::to_string(n * n) + " values");
  std::string extra;
  if (in >> extra) throw IoError("matrix file: trailing data after " + std::to_string(n) + " rows");
  return M;
}

void write_square_matrix(std::ostream& out, const Matrix& M) {
  out << M.rows() << '\n' << std::setprecision(17);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) out << (j ? " " : "") << M(i, j);
    out << '\n';
  }
}

Adjacency read_adjacency(std::istream& in) { return Adjacency(read_square_matrix(in)); }

Adjacency read_adjacency(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_adjacency(in);
}

void write_adjacency(std::ostream& out, const Adjacency& W) { write_square_matrix(out, W.weights()); }

void write_adjacency(const std::filesystem::path& path, const Adjacency& W) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_adjacency(out, W);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace graphs
}  // namespace prodgraph
