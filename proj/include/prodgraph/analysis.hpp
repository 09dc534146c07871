#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prodgraph/graphs.hpp"
#include "prodgraph/linalg.hpp"

namespace prodgraph::analysis {

// Sufficient conditions for the l1 problem to recover the sparsest feasible w.
struct RecoveryReport {
  bool condA1 = false;
  Index rank_RZc = 0;
  Index card_Zc = 0;
  bool condA2 = false;
  double psi_min = 0.0;
  double delta_at_min = 0.0;
  // Node 0 has at least one edge, so the normalization can be met.
  bool feasible = false;
  std::vector<double> skipped_deltas;
  std::string diagnostic;

  bool holds() const { return condA1 && condA2; }
};

// [(I - Phi Phi^+)^T, e_1 (x) 1_{N-1}], M x (M+1) with M = N(N-1)/2. b = e_last.
Matrix build_R(const linalg::PhiOperator& phi);

struct A1Result {
  bool holds = false;
  Index rank = 0;
};

// Rank of the rows of R indexed by the support, at tolerance 1e-8 * sigma_max.
A1Result check_A1(const Matrix& R, std::span<const Index> support);

enum class PsiMethod { Inverse, Solve };

// ||I_Z (delta^-2 R R^T + I_Z^T I_Z)^-1 I_Zc^T||_inf (max absolute row sum).
// Returns nullopt when the inner matrix is singular at this delta.
std::optional<double> psi(const Matrix& R, std::span<const Index> zeros, double delta,
                          PsiMethod method = PsiMethod::Solve);

struct A2Result {
  bool holds = false;
  double psi_min = 0.0;
  double delta = 0.0;
  std::vector<double> skipped;
};

A2Result check_A2(const Matrix& R, std::span<const Index> zeros, std::span<const double> grid);

// 25 points, logarithmically spaced over [1e-3, 1e3].
std::vector<double> default_delta_grid();

// Slots of w with |w_i| > tol * max|w|; the complement in [0, M).
std::vector<Index> support_of(const Vector& w, double tol = 1e-9);
std::vector<Index> complement(std::span<const Index> support, Index m);

// Both conditions for template V and edge support (slot indices).
RecoveryReport check_recovery(const Matrix& V, std::span<const Index> support,
                              std::span<const double> grid = {});

// Binarizes W_est at thr_rel * max(W_est) and scores the upper-triangle edges.
// Both graphs empty gives 1; an empty truth with a nonempty estimate gives 0.
double f1_score(const Adjacency& truth, const Adjacency& estimate, double thr_rel = 0.1);

// ||W - W_hat||_F^2 / ||W||_F^2 after max-normalizing both. Throws on a zero truth.
double edge_l2_error(const Adjacency& truth, const Adjacency& estimate);

// ROC AUC of the estimate's weights as edge scores, midrank ties. nullopt when the truth
// has no edges or every pair is an edge.
std::optional<double> auc_score(const Adjacency& truth, const Adjacency& estimate);

}  // namespace prodgraph::analysis
