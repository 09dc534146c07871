#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "prodgraph/analysis.hpp"
#include "prodgraph/error.hpp"

using namespace prodgraph;
using namespace prodgraph::analysis;

namespace {

Adjacency from_edges(Index n, std::initializer_list<std::pair<Index, Index>> edges, double w = 1.0) {
  Matrix W = Matrix::Zero(n, n);
  for (auto [a, b] : edges) W(a, b) = W(b, a) = w;
  return Adjacency(W);
}

Adjacency cycle4() { return from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}); }

Matrix eigvecs(const Adjacency& A) { return linalg::sym_evd(A.weights()).V; }

std::vector<Index> true_support(const Adjacency& A) { return support_of(linalg::vechn(A.weights()).entries()); }

}  // namespace

TEST_CASE("R for two nodes") {
  const Matrix R = build_R(linalg::PhiOperator(Matrix::Identity(2, 2)));
  REQUIRE(R.rows() == 1);
  REQUIRE(R.cols() == 2);
  CHECK(R(0, 0) == doctest::Approx(1.0));
  CHECK(R(0, 1) == 1.0);
}

TEST_CASE("the projector block of R") {
  std::mt19937_64 rng(1);
  const Matrix V = oracle::random_orthonormal(6, rng);
  const Matrix R = build_R(linalg::PhiOperator(V));
  const Index m = R.rows();
  const Matrix P = R.leftCols(m);
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  const Matrix Pphi = oracle::phi(V);
  CHECK((P - (Matrix::Identity(m, m) - Pphi * oracle::pinv(Pphi))).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(R.col(m).head(5).isOnes(0.0));
  CHECK(R.col(m).tail(m - 5).isZero(0.0));
}

TEST_CASE("the normalized true graph satisfies R^T w = b") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Adjacency A = graphs::erdos_renyi(7, 0.5, 10 + seed, {graphs::EdgeWeights::Mode::Uniform, 0.5, 1.5});
    if (A.weights().row(0).sum() == 0.0) continue;
    const Matrix R = build_R(linalg::PhiOperator(eigvecs(A)));
    const Vector w = linalg::vechn(A.weights() / A.weights().row(0).sum()).entries();
    Vector b = Vector::Zero(R.cols());
    b[R.cols() - 1] = 1.0;
    CHECK((R.transpose() * w - b).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("condition A1") {
  const Adjacency A = from_edges(3, {{1, 0}});
  const Matrix R = build_R(linalg::PhiOperator(eigvecs(A)));
  const Index one[] = {0};
  CHECK(check_A1(R, one).holds == (R.row(0).norm() > 0.0));
  CHECK(check_A1(R, one).holds);

  const Adjacency C = graphs::erdos_renyi(6, 0.9, 2);
  const Matrix RC = build_R(linalg::PhiOperator(eigvecs(C)));
  const auto full = true_support(C);
  const A1Result r = check_A1(RC, full);
  CHECK(r.rank <= std::min<Index>(static_cast<Index>(full.size()), RC.cols()));

  Matrix dup = Matrix::Zero(3, 4);
  dup.row(0) << 1, 2, 3, 4;
  dup.row(1) = dup.row(0);
  dup.row(2) << 0, 1, 0, 0;
  const Index both[] = {0, 1};
  CHECK_FALSE(check_A1(dup, both).holds);
  CHECK(check_A1(dup, both).rank == 1);
  const Index indep[] = {0, 2};
  CHECK(check_A1(dup, indep).holds);
  CHECK(check_A1(dup, std::span<const Index>{}).holds);
  CHECK(check_A1(dup, std::span<const Index>{}).rank == 0);
}

TEST_CASE("psi") {
  std::mt19937_64 rng(4);
  const Matrix V = oracle::random_orthonormal(5, rng);
  const Matrix R = build_R(linalg::PhiOperator(V));
  CHECK(*psi(R, std::span<const Index>{}, 1.0) == 0.0);
  const std::vector<Index> zeros{1, 4, 5, 7, 9};
  for (double delta : default_delta_grid()) {
    const auto a = psi(R, zeros, delta, PsiMethod::Inverse);
    const auto b = psi(R, zeros, delta, PsiMethod::Solve);
    REQUIRE(a.has_value() == b.has_value());
    if (a) CHECK(std::abs(*a - *b) <= 1e-8 * std::max(1.0, std::abs(*a)));
  }
  CHECK_THROWS_AS(psi(R, zeros, 0.0), ValidationError);
}

TEST_CASE("condition A2 on a grid") {
  const auto grid = default_delta_grid();
  REQUIRE(grid.size() == 25);
  CHECK(grid.front() == doctest::Approx(1e-3));
  CHECK(grid.back() == doctest::Approx(1e3));
  const Adjacency A = graphs::erdos_renyi(5, 0.5, 6);
  const Matrix R = build_R(linalg::PhiOperator(eigvecs(A)));
  const auto zeros = complement(true_support(A), R.rows());
  const A2Result r = check_A2(R, zeros, grid);
  CHECK(r.holds == (r.psi_min < 1.0));
  // The psi system is invertible exactly when the support rows of R are independent.
  const bool a1 = check_A1(R, true_support(A)).holds;
  CHECK(r.skipped.empty() == a1);
  if (a1) {
    CHECK(std::find(grid.begin(), grid.end(), r.delta) != grid.end());
    CHECK(*psi(R, zeros, r.delta) == r.psi_min);
  } else {
    CHECK(r.skipped.size() == grid.size());
    CHECK(std::isinf(r.psi_min));
  }
  for (double d : grid)
    if (auto v = psi(R, zeros, d)) CHECK(std::isfinite(*v));
  CHECK(check_A2(R, std::span<const Index>{}, grid).holds);
  CHECK_THROWS_AS(check_A2(R, zeros, std::span<const double>{}), ValidationError);
}

TEST_CASE("recovery report") {
  const Adjacency A = graphs::erdos_renyi(5, 0.5, 8);
  const auto support = true_support(A);
  const RecoveryReport r = check_recovery(eigvecs(A), support);
  CHECK(r.card_Zc == static_cast<Index>(support.size()));
  CHECK(r.condA1 == (r.rank_RZc == r.card_Zc));
  CHECK(r.condA2 == (r.psi_min < 1.0));
  CHECK(r.feasible == (A.weights().row(0).sum() > 0.0));
}

TEST_CASE("sufficient direction against the uniqueness oracle") {
  int holds = 0, confirmed = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Adjacency A = graphs::erdos_renyi(5, 0.4, 200 + seed);
    if (A.weights().row(0).sum() == 0.0) continue;
    const Matrix V = eigvecs(A);
    const oracle::LpSummary lp = oracle::summarize(oracle::vertices(oracle::relaxed_polytope(V)));
    REQUIRE(lp.feasible);
    // Candidate: the l1 minimizer's own support.
    const auto support = support_of(lp.argmin, 1e-7);
    if (!check_recovery(V, support).holds()) continue;
    ++holds;
    confirmed += lp.minimizers == 1 && static_cast<Index>(support.size()) == lp.l0_min;
  }
  MESSAGE("conditions hold on " << holds << " graphs, oracle confirms " << confirmed);
  CHECK(holds > 0);
  CHECK(confirmed * 100 >= holds * 95);
}

TEST_CASE("f1 examples") {
  const Adjacency c4 = cycle4();
  CHECK(f1_score(c4, Adjacency(3.7 * c4.weights())) == 1.0);
  Matrix comp = Matrix::Ones(4, 4) - c4.weights();
  comp.diagonal().setZero();
  CHECK(f1_score(c4, Adjacency(comp)) == 0.0);
  Matrix extra = c4.weights();
  extra(0, 2) = extra(2, 0) = 1.0;
  CHECK(f1_score(c4, Adjacency(extra)) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));

  const Adjacency empty(Matrix::Zero(4, 4));
  CHECK(f1_score(empty, empty) == 1.0);
  CHECK(f1_score(empty, c4) == 0.0);
  CHECK(f1_score(c4, empty) == 0.0);
  Matrix faint = c4.weights();
  faint(0, 2) = faint(2, 0) = 0.05;
  CHECK(f1_score(c4, Adjacency(faint), 0.1) == 1.0);
  CHECK(f1_score(c4, Adjacency(faint), 0.01) < 1.0);
  CHECK_THROWS_AS(f1_score(c4, Adjacency(Matrix::Zero(3, 3))), ValidationError);
  CHECK_THROWS_AS(f1_score(c4, c4, 1.0), ValidationError);
}

TEST_CASE("edge l2 error examples") {
  const Adjacency c4 = cycle4();
  CHECK(edge_l2_error(c4, c4) == 0.0);
  CHECK(edge_l2_error(c4, Adjacency(Matrix::Zero(4, 4))) == 1.0);
  const Adjacency one = from_edges(3, {{0, 1}});
  CHECK(edge_l2_error(one, from_edges(3, {{0, 1}}, 0.5)) == 0.0);
  CHECK_THROWS_AS(edge_l2_error(Adjacency(Matrix::Zero(3, 3)), one), ValidationError);
}

TEST_CASE("auc examples") {
  const Adjacency c4 = cycle4();
  CHECK(*auc_score(c4, c4) == 1.0);
  Matrix flat = Matrix::Ones(4, 4);
  flat.diagonal().setZero();
  CHECK(*auc_score(c4, Adjacency(flat)) == 0.5);
  CHECK_FALSE(auc_score(Adjacency(Matrix::Zero(4, 4)), c4).has_value());
  CHECK_FALSE(auc_score(Adjacency(flat), c4).has_value());
}

TEST_CASE("auc against the pairwise definition") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> coarse(0, 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Adjacency truth = graphs::erdos_renyi(5, 0.5, seed);
    Matrix S = Matrix::Zero(5, 5);
    for (Index c = 0; c < 5; ++c)
      for (Index r = c + 1; r < 5; ++r) S(r, c) = S(c, r) = 0.25 * coarse(rng);  // ties on purpose
    const auto auc = auc_score(truth, Adjacency(S));
    if (!auc) continue;
    std::vector<double> scores;
    std::vector<bool> labels;
    for (Index c = 0; c < 5; ++c)
      for (Index r = c + 1; r < 5; ++r) {
        scores.push_back(S(r, c));
        labels.push_back(truth(r, c) > 0.0);
      }
    CHECK(std::abs(*auc - oracle::pairwise_auc(scores, labels)) <= 1e-12);
  }
}

TEST_CASE("metrics ignore positive rescaling of the estimate") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0), scale(0.01, 100.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Adjacency truth = graphs::erdos_renyi(6, 0.4, 50 + trial);
    if (truth.edge_count() == 0 || truth.edge_count() == 15) continue;
    Matrix S = Matrix::Zero(6, 6);
    for (Index c = 0; c < 6; ++c)
      for (Index r = c + 1; r < 6; ++r) S(r, c) = S(c, r) = u(rng);
    const double k = scale(rng);
    const Adjacency a(S), b(k * S);
    CHECK(f1_score(truth, a) == f1_score(truth, b));
    CHECK(*auc_score(truth, a) == *auc_score(truth, b));
    CHECK(edge_l2_error(truth, a) == doctest::Approx(edge_l2_error(truth, b)).epsilon(1e-12));
  }
}
