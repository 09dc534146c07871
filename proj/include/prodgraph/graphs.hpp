#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>

#include "prodgraph/linalg.hpp"

namespace prodgraph {

// Undirected weighted graph: W symmetric, nonnegative, zero diagonal.
class Adjacency {
 public:
  Adjacency() = default;
  // Validates the invariants; throws ValidationError on violation.
  explicit Adjacency(Matrix W);

  Index nodes() const { return W_.rows(); }
  const Matrix& weights() const { return W_; }
  double operator()(Index i, Index j) const { return W_(i, j); }
  Index edge_count() const;

 private:
  Matrix W_;
};

enum class ProductKind { Cartesian, Kronecker, Strong };

std::string_view to_string(ProductKind kind);
ProductKind parse_product_kind(std::string_view name);

namespace graphs {

struct EdgeWeights {
  enum class Mode { Unit, Uniform };
  Mode mode = Mode::Unit;
  double low = 0.5;  // Uniform only
  double high = 1.5;
};

// Each unordered pair is an edge independently with probability p.
Adjacency erdos_renyi(Index n, double p, std::uint64_t seed, EdgeWeights weights = {});

Adjacency graph_product(const Adjacency& A, const Adjacency& B, ProductKind kind);

// Left fold of the binary product; factor 0 is the leftmost Kronecker factor.
Adjacency graph_product(std::span<const Adjacency> factors, ProductKind kind);

// Eigendecomposition of the product built from the factor eigendecompositions:
// V = V_1 (x) ... (x) V_n, eigenvalues composed per product rule. Columns follow the
// Kronecker index order, so lambda is NOT sorted (unlike linalg::sym_evd).
linalg::EvdResult product_evd(std::span<const Adjacency> factors, ProductKind kind);

// Text format: first line n, then n rows of n whitespace-separated decimals.
Adjacency read_adjacency(std::istream& in);
Adjacency read_adjacency(const std::filesystem::path& path);
void write_adjacency(std::ostream& out, const Adjacency& W);
void write_adjacency(const std::filesystem::path& path, const Adjacency& W);

// Same text layout for an arbitrary square matrix (spectral templates).
Matrix read_square_matrix(std::istream& in);
void write_square_matrix(std::ostream& out, const Matrix& M);

}  // namespace graphs
}  // namespace prodgraph
