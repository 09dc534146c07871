#pragma once

#include <Eigen/Dense>

#include <string>

namespace prodgraph {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

// Number of strict-lower-triangle slots of an n x n matrix.
constexpr Index edge_slots(Index n) { return n * (n - 1) / 2; }

// Inverse of edge_slots. Throws ValidationError if m is not n(n-1)/2 for some n >= 2.
Index nodes_from_slots(Index m);

// Position of edge (r, c), r > c, in the column-major strict-lower-triangle order
// (2,1),(3,1),...,(n,1),(3,2),... (zero-based indices).
constexpr Index edge_slot(Index r, Index c, Index n) {
  return c * n - c * (c + 1) / 2 + (r - c - 1);
}

// Half-vectorized hollow symmetric matrix. The first n-1 entries are the edges of node 0.
class HollowSymVec {
 public:
  HollowSymVec() = default;
  explicit HollowSymVec(Vector entries);

  Index nodes() const { return n_; }
  Index size() const { return entries_.size(); }
  const Vector& entries() const { return entries_; }
  double operator[](Index i) const { return entries_[i]; }

 private:
  Vector entries_;
  Index n_ = 0;
};

HollowSymVec vechn(const Matrix& W);
Matrix unvechn(const HollowSymVec& w);

// Minimum-norm least squares through a rank-revealing orthogonal factorization that is
// computed once at construction.
class LeastSquares {
 public:
  LeastSquares() = default;
  explicit LeastSquares(const Matrix& A);

  Vector solve(const Vector& b) const;
  Index rank() const { return cod_.rank(); }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

 private:
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_;
  Index rows_ = 0;
  Index cols_ = 0;
};

// Linear map from template eigenvalues to the half-vectorized off-diagonal of
// V diag(lambda) V^T. Entry (slot(r,c), k) is V(r,k) V(c,k).
class PhiOperator {
 public:
  PhiOperator() = default;
  explicit PhiOperator(const Matrix& V);

  const Matrix& matrix() const { return phi_; }
  Index nodes() const { return phi_.cols(); }
  Index slots() const { return phi_.rows(); }
  Index rank() const { return lsq_.rank(); }

  // ||V^T V - I||_F of the template the operator was built from.
  double orthonormality_error() const { return orth_error_; }
  // Non-empty when the template was not orthonormal to 1e-8 * n; a warning, not an error.
  const std::string& diagnostic() const { return diagnostic_; }

  Vector apply(const Vector& lambda) const;
  // argmin ||Phi lambda - b||, minimum-norm when Phi is rank deficient.
  Vector solve(const Vector& b) const;

 private:
  Matrix phi_;
  LeastSquares lsq_;
  double orth_error_ = 0.0;
  std::string diagnostic_;
};

// Builds Phi entrywise; never materializes the duplication matrix or V (.) V.
PhiOperator phi_from_template(const Matrix& V);

Vector soft_threshold(const Vector& v, double tau);

// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
Vector project_simplex(const Vector& v);

// Projection onto W_r: the first m coordinates go to the simplex, the rest are clamped at 0.
Vector project_wr(const Vector& v, Index m);

struct EvdResult {
  Matrix V;       // orthonormal columns
  Vector lambda;  // ascending
};

// Symmetric eigendecomposition, ascending eigenvalues. Each eigenvector is signed so
// that its largest-magnitude entry (first one on ties) is positive.
EvdResult sym_evd(const Matrix& C);

// Flip columns so the largest-magnitude entry of each is positive.
void canonicalize_signs(Matrix& V);

Matrix kron(const Matrix& A, const Matrix& B);
Matrix khatri_rao(const Matrix& A, const Matrix& B);

}  // namespace linalg
}  // namespace prodgraph
