#include "prodgraph/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "prodgraph/error.hpp"

namespace prodgraph::linalg {

Index nodes_from_slots(Index m) {
  // n(n-1)/2 = m  =>  n = (1 + sqrt(1 + 8m)) / 2
  const auto n = static_cast<Index>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(m))) / 2.0));
  detail::require(m >= 1 && edge_slots(n) == m,
                  "length " + std::to_string(m) + " is not n(n-1)/2 for any n >= 2");
  return n;
}

HollowSymVec::HollowSymVec(Vector entries) : entries_(std::move(entries)), n_(nodes_from_slots(entries_.size())) {}

namespace {

double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

}  // namespace

HollowSymVec vechn(const Matrix& W) {
  detail::require(W.rows() == W.cols(), "vechn: matrix is not square");
  detail::require(W.rows() >= 2, "vechn: need at least 2 nodes");
  const Index n = W.rows();
  const double tol = 1e-12 * std::max(1.0, max_abs(W));
  for (Index i = 0; i < n; ++i) {
    detail::require(std::abs(W(i, i)) <= tol, "vechn: nonzero diagonal entry at " + std::to_string(i));
    for (Index j = 0; j < i; ++j)
      detail::require(std::abs(W(i, j) - W(j, i)) <= tol, "vechn: matrix is not symmetric");
  }
  Vector w(edge_slots(n));
  Index k = 0;
  for (Index c = 0; c < n; ++c)
    for (Index r = c + 1; r < n; ++r) w[k++] = W(r, c);
  return HollowSymVec(std::move(w));
}

Matrix unvechn(const HollowSymVec& w) {
  const Index n = w.nodes();
  Matrix W = Matrix::Zero(n, n);
  Index k = 0;
  for (Index c = 0; c < n; ++c)
    for (Index r = c + 1; r < n; ++r) {
      W(r, c) = w[k];
      W(c, r) = w[k];
      ++k;
    }
  return W;
}

LeastSquares::LeastSquares(const Matrix& A) : cod_(A.rows(), A.cols()), rows_(A.rows()), cols_(A.cols()) {
  // Eigen's default cutoff keeps pivots near 1e-15, whose inverse swamps the minimum-norm solution.
  cod_.setThreshold(1e-10);
  cod_.compute(A);
}

Vector LeastSquares::solve(const Vector& b) const {
  detail::require(b.size() == rows_, "least squares: right-hand side has wrong length");
  return cod_.solve(b);
}

PhiOperator::PhiOperator(const Matrix& V) {
  detail::require(V.rows() == V.cols() && V.rows() >= 2, "Phi: template must be square with n >= 2");
  const Index n = V.rows();
  phi_.resize(edge_slots(n), n);
  for (Index k = 0; k < n; ++k) {
    Index slot = 0;
    for (Index c = 0; c < n; ++c)
      for (Index r = c + 1; r < n; ++r) phi_(slot++, k) = V(r, k) * V(c, k);
  }
  lsq_ = LeastSquares(phi_);
  orth_error_ = (V.transpose() * V - Matrix::Identity(n, n)).norm();
  if (orth_error_ > 1e-8 * static_cast<double>(n)) {
    std::ostringstream os;
    os << "template is not orthonormal: ||V^T V - I||_F = " << orth_error_;
    diagnostic_ = os.str();
  }
}

Vector PhiOperator::apply(const Vector& lambda) const {
  detail::require(lambda.size() == phi_.cols(), "Phi: eigenvalue vector has wrong length");
  return phi_ * lambda;
}

Vector PhiOperator::solve(const Vector& b) const { return lsq_.solve(b); }

PhiOperator phi_from_template(const Matrix& V) { return PhiOperator(V); }

Vector soft_threshold(const Vector& v, double tau) {
  detail::require(tau >= 0.0, "soft_threshold: negative threshold");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - tau;
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

Vector project_simplex(const Vector& v) {
  detail::require(v.size() >= 1, "project_simplex: empty input");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Vector project_wr(const Vector& v, Index m) {
  detail::require(m >= 1, "project_wr: simplex block must have at least one coordinate");
  detail::require(v.size() >= m, "project_wr: vector shorter than simplex block");
  Vector out = v.cwiseMax(0.0);
  out.head(m) = project_simplex(v.head(m));
  return out;
}

void canonicalize_signs(Matrix& V) {
  for (Index k = 0; k < V.cols(); ++k) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < V.rows(); ++i) {
      if (std::abs(V(i, k)) > best) {
        best = std::abs(V(i, k));
        arg = i;
      }
    }
    if (V(arg, k) < 0.0) V.col(k) = -V.col(k);
  }
}

EvdResult sym_evd(const Matrix& C) {
  detail::require(C.rows() == C.cols(), "sym_evd: matrix is not square");
  const double scale = std::max(1.0, max_abs(C));
  detail::require((C - C.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale, "sym_evd: matrix is not symmetric");
  const Matrix S = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_evd: eigensolver did not converge");
  EvdResult out{es.eigenvectors(), es.eigenvalues()};
  canonicalize_signs(out.V);
  return out;
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

Matrix khatri_rao(const Matrix& A, const Matrix& B) {
  detail::require(A.cols() == B.cols(), "khatri_rao: column counts differ");
  Matrix K(A.rows() * B.rows(), A.cols());
  for (Index k = 0; k < A.cols(); ++k)
    for (Index i = 0; i < A.rows(); ++i) K.col(k).segment(i * B.rows(), B.rows()) = A(i, k) * B.col(k);
  return K;
}

}  // namespace prodgraph::linalg
