#include "prodgraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "prodgraph/error.hpp"

namespace prodgraph::analysis {

Matrix build_R(const linalg::PhiOperator& phi) {
  const Index m = phi.slots();
  const Index n = phi.nodes();
  // Phi Phi^+ is the projector onto range(Phi): Phi times its min-norm solve of each e_i.
  Matrix proj(m, m);
  for (Index i = 0; i < m; ++i) proj.col(i) = phi.apply(phi.solve(Vector::Unit(m, i)));
  Matrix R = Matrix::Zero(m, m + 1);
  R.leftCols(m) = (Matrix::Identity(m, m) - proj).transpose();
  R.col(m).head(n - 1).setOnes();
  return R;
}

namespace {

Matrix select_rows(const Matrix& A, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail::require(rows[i] >= 0 && rows[i] < A.rows(), "recovery: index out of range");
    out.row(static_cast<Index>(i)) = A.row(rows[i]);
  }
  return out;
}

}  // namespace

A1Result check_A1(const Matrix& R, std::span<const Index> support) {
  if (support.empty()) return {true, 0};
  const Matrix rows = select_rows(R, support);
  const Vector sv = Eigen::BDCSVD<Matrix>(rows).singularValues();
  const double tol = 1e-8 * (sv.size() ? sv[0] : 0.0);
  A1Result out;
  out.rank = sv.size() && sv[0] > 0.0 ? static_cast<Index>((sv.array() > tol).count()) : 0;
  out.holds = out.rank == static_cast<Index>(support.size());
  return out;
}

std::optional<double> psi(const Matrix& R, std::span<const Index> zeros, double delta, PsiMethod method) {
  detail::require(delta > 0.0, "psi: delta must be positive");
  const Index m = R.rows();
  if (zeros.empty()) return 0.0;
  std::vector<char> in_zeros(static_cast<std::size_t>(m), 0);
  for (Index z : zeros) {
    detail::require(z >= 0 && z < m, "psi: index out of range");
    in_zeros[static_cast<std::size_t>(z)] = 1;
  }
  std::vector<Index> support;
  for (Index i = 0; i < m; ++i)
    if (!in_zeros[static_cast<std::size_t>(i)]) support.push_back(i);
  if (support.empty()) return 0.0;

  Matrix A = (R * R.transpose()) / (delta * delta);
  for (Index z : zeros) A(z, z) += 1.0;
  const Index nz = static_cast<Index>(zeros.size());
  const Index ns = static_cast<Index>(support.size());

  Matrix block(nz, ns);  // I_Z A^-1 I_Zc^T
  if (method == PsiMethod::Inverse) {
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible()) return std::nullopt;
    const Matrix inv = lu.inverse();
    for (Index i = 0; i < nz; ++i)
      for (Index j = 0; j < ns; ++j) block(i, j) = inv(zeros[i], support[j]);
  } else {
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    const Vector d = ldlt.vectorD();
    if (d.minCoeff() <= 1e-14 * std::max(1.0, d.cwiseAbs().maxCoeff())) return std::nullopt;
    Matrix rhs = Matrix::Zero(m, ns);
    for (Index j = 0; j < ns; ++j) rhs(support[j], j) = 1.0;
    const Matrix x = ldlt.solve(rhs);
    for (Index i = 0; i < nz; ++i) block.row(i) = x.row(zeros[i]);
  }
  if (!block.allFinite()) return std::nullopt;
  return block.cwiseAbs().rowwise().sum().maxCoeff();
}

std::vector<double> default_delta_grid() {
  std::vector<double> grid(25);
  for (int i = 0; i < 25; ++i) grid[i] = std::pow(10.0, -3.0 + 6.0 * i / 24.0);
  return grid;
}

A2Result check_A2(const Matrix& R, std::span<const Index> zeros, std::span<const double> grid) {
  detail::require(!grid.empty(), "check_A2: empty delta grid");
  A2Result out;
  bool any = false;
  for (double delta : grid) {
    detail::require(delta > 0.0, "check_A2: delta must be positive");
    const std::optional<double> v = psi(R, zeros, delta);
    if (!v) {
      out.skipped.push_back(delta);
      continue;
    }
    if (!any || *v < out.psi_min) {
      out.psi_min = *v;
      out.delta = delta;
      any = true;
    }
  }
  if (!any) {
    out.psi_min = std::numeric_limits<double>::infinity();
    return out;
  }
  out.holds = out.psi_min < 1.0;
  return out;
}

std::vector<Index> support_of(const Vector& w, double tol) {
  std::vector<Index> out;
  const double m = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  if (m == 0.0) return out;
  for (Index i = 0; i < w.size(); ++i)
    if (std::abs(w[i]) > tol * m) out.push_back(i);
  return out;
}

std::vector<Index> complement(std::span<const Index> support, Index m) {
  std::vector<char> in(static_cast<std::size_t>(m), 0);
  for (Index i : support) {
    detail::require(i >= 0 && i < m, "complement: index out of range");
    in[static_cast<std::size_t>(i)] = 1;
  }
  std::vector<Index> out;
  for (Index i = 0; i < m; ++i)
    if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

RecoveryReport check_recovery(const Matrix& V, std::span<const Index> support, std::span<const double> grid) {
  const linalg::PhiOperator phi(V);
  const Matrix R = build_R(phi);
  const Index n = V.rows();
  const std::vector<double> fallback = default_delta_grid();
  if (grid.empty()) grid = fallback;

  RecoveryReport rep;
  const A1Result a1 = check_A1(R, support);
  rep.condA1 = a1.holds;
  rep.rank_RZc = a1.rank;
  rep.card_Zc = static_cast<Index>(support.size());
  const std::vector<Index> zeros = complement(support, R.rows());
  const A2Result a2 = check_A2(R, zeros, grid);
  rep.condA2 = a2.holds;
  rep.psi_min = a2.psi_min;
  rep.delta_at_min = a2.delta;
  rep.skipped_deltas = a2.skipped;
  rep.feasible = std::any_of(support.begin(), support.end(), [n](Index i) { return i < n - 1; });

  std::ostringstream diag;
  if (!rep.skipped_deltas.empty()) diag << rep.skipped_deltas.size() << " delta values skipped (singular)";
  if (!rep.feasible) diag << (diag.tellp() > 0 ? "; " : "") << "node 1 has no edges, normalization infeasible";
  if (!phi.diagnostic().empty()) diag << (diag.tellp() > 0 ? "; " : "") << phi.diagnostic();
  rep.diagnostic = diag.str();
  return rep;
}

namespace {

void require_same(const Adjacency& a, const Adjacency& b, const char* who) {
  detail::require(a.nodes() == b.nodes(), std::string(who) + ": graphs differ in size");
}

}  // namespace

double f1_score(const Adjacency& truth, const Adjacency& estimate, double thr_rel) {
  require_same(truth, estimate, "f1_score");
  detail::require(thr_rel > 0.0 && thr_rel < 1.0, "f1_score: thr_rel must be in (0, 1)");
  const Matrix& T = truth.weights();
  const Matrix& E = estimate.weights();
  const double cut = thr_rel * (E.size() ? E.maxCoeff() : 0.0);
  Index tp = 0, fp = 0, fn = 0;
  for (Index c = 0; c < T.cols(); ++c)
    for (Index r = c + 1; r < T.rows(); ++r) {
      const bool t = T(r, c) > 0.0;
      const bool e = E(r, c) > cut && E(r, c) > 0.0;
      tp += t && e;
      fp += !t && e;
      fn += t && !e;
    }
  if (tp + fn == 0) return fp == 0 ? 1.0 : 0.0;
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double edge_l2_error(const Adjacency& truth, const Adjacency& estimate) {
  require_same(truth, estimate, "edge_l2_error");
  const double tmax = truth.weights().maxCoeff();
  if (!(tmax > 0.0)) throw ValidationError("edge_l2_error: truth graph has no edges");
  const Matrix T = truth.weights() / tmax;
  const double emax = estimate.weights().maxCoeff();
  const Matrix E = emax > 0.0 ? Matrix(estimate.weights() / emax) : estimate.weights();
  return (T - E).squaredNorm() / T.squaredNorm();
}

std::optional<double> auc_score(const Adjacency& truth, const Adjacency& estimate) {
  require_same(truth, estimate, "auc_score");
  const Index n = truth.nodes();
  std::vector<std::pair<double, bool>> items;
  items.reserve(static_cast<std::size_t>(linalg::edge_slots(n)));
  for (Index c = 0; c < n; ++c)
    for (Index r = c + 1; r < n; ++r) items.emplace_back(estimate(r, c), truth(r, c) > 0.0);
  const auto pos = static_cast<double>(std::count_if(items.begin(), items.end(), [](auto& p) { return p.second; }));
  const double neg = static_cast<double>(items.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return std::nullopt;
  std::sort(items.begin(), items.end(), [](auto& a, auto& b) { return a.first < b.first; });
  // Mann-Whitney: sum of positive midranks.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    while (j < items.size() && items[j].first == items[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (items[k].second) rank_sum += midrank;
    i = j;
  }
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

}  // namespace prodgraph::analysis
