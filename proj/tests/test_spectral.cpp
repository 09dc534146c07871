#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "prodgraph/error.hpp"
#include "prodgraph/spectral.hpp"

using namespace prodgraph;

namespace {

const graphs::EdgeWeights kUniform{graphs::EdgeWeights::Mode::Uniform, 0.5, 1.5};

// V (sum_l h_l Lambda^l)^2 V^T from the product eigendecomposition.
Matrix population_covariance(const std::vector<Adjacency>& f, ProductKind kind, const FilterSpec& h) {
  const linalg::EvdResult evd = graphs::product_evd(f, kind);
  Vector g(evd.lambda.size());
  for (Index i = 0; i < g.size(); ++i) g[i] = std::pow(h.response(evd.lambda[i]), 2);
  return evd.V * g.asDiagonal() * evd.V.transpose();
}

// Eigenvectors of each factor, sorted as sym_evd sorts them.
Matrix factor_basis(const Adjacency& A) { return linalg::sym_evd(A.weights()).V; }

}  // namespace

TEST_CASE("sample second moment") {
  Matrix x(3, 1);
  x << 1, 2, 3;
  const Matrix one[] = {x};
  CHECK(spectral::sample_second_moment(one) == x * x.transpose());
  CHECK_THROWS_AS(spectral::sample_second_moment(std::span<const Matrix>{}), ValidationError);

  std::mt19937_64 rng(1);
  std::vector<Matrix> Ms;
  for (int t = 0; t < 5; ++t) Ms.push_back(oracle::random_orthonormal(4, rng).leftCols(2));
  CHECK(spectral::sample_second_moment(Ms).trace() == doctest::Approx(2.0));

  std::normal_distribution<double> g;
  std::vector<Matrix> white;
  for (int t = 0; t < 100000; ++t) {
    Matrix v(3, 1);
    v << g(rng), g(rng), g(rng);
    white.push_back(v);
  }
  const Matrix C = spectral::sample_second_moment(white);
  CHECK((C - Matrix(C.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 0.05);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(C).eigenvalues().minCoeff() >= -1e-10 * C.trace());
}

TEST_CASE("mode unfoldings of a 2x2x2 tensor") {
  Tensor t{{2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}};
  Matrix m1(2, 4), m2(2, 4), m3(2, 4);
  m1 << 1, 3, 5, 7, 2, 4, 6, 8;
  m2 << 1, 2, 5, 6, 3, 4, 7, 8;
  m3 << 1, 2, 3, 4, 5, 6, 7, 8;
  CHECK(spectral::mode_unfold(t, 1) == m1);
  CHECK(spectral::mode_unfold(t, 2) == m2);
  CHECK(spectral::mode_unfold(t, 3) == m3);
  CHECK_THROWS_AS(spectral::mode_unfold(t, 0), ValidationError);
  CHECK_THROWS_AS(spectral::mode_unfold(t, 4), ValidationError);
  for (Index mode = 1; mode <= 3; ++mode)
    CHECK(spectral::mode_fold(spectral::mode_unfold(t, mode), t.shape, mode).data == t.data);
}

TEST_CASE("two-factor unfoldings reproduce the signal matrix") {
  const Index P = 3, Q = 4;
  Vector x = Vector::LinSpaced(P * Q, 1, 12);
  const Index dims[] = {P, Q};
  const Tensor t = diffusion::reshape_tensor(x, dims);
  const Matrix X = diffusion::reshape_matrix(x, Q, P);
  CHECK(spectral::mode_unfold(t, 1) == X);
  CHECK(spectral::mode_unfold(t, 2) == X.transpose());
  CHECK(spectral::factor_of_mode(1, 2) == 2);
  CHECK(spectral::factor_of_mode(2, 2) == 1);
}

TEST_CASE("mode second moments match explicit unfoldings") {
  Matrix X(12, 7);
  X.setRandom();
  const SignalBatch b(X, {3, 2, 2});
  for (Index mode = 1; mode <= 3; ++mode) {
    std::vector<Matrix> unfolded;
    for (Index t = 0; t < X.cols(); ++t) {
      const Vector col = X.col(t);
      const Index dims[] = {3, 2, 2};
      unfolded.push_back(spectral::mode_unfold(diffusion::reshape_tensor(col, dims), mode));
    }
    CHECK((spectral::mode_second_moment(b, mode) - spectral::sample_second_moment(unfolded)).norm() < 1e-12);
  }
}

TEST_CASE("population factor covariances are diagonalized by the factor bases") {
  const FilterSpec h({1.0, 0.5});
  const std::vector<Adjacency> f{graphs::erdos_renyi(5, 0.4, 11), graphs::erdos_renyi(4, 0.4, 12)};
  for (ProductKind kind : {ProductKind::Cartesian, ProductKind::Kronecker, ProductKind::Strong}) {
    const Matrix C = population_covariance(f, kind, h);
    const Matrix CQ = oracle::partial_trace(C, {4, 5}, 0);
    const Matrix CP = oracle::partial_trace(C, {4, 5}, 1);
    const Matrix DQ = factor_basis(f[1]).transpose() * CQ * factor_basis(f[1]);
    const Matrix DP = factor_basis(f[0]).transpose() * CP * factor_basis(f[0]);
    CHECK((DQ - Matrix(DQ.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <= 1e-10 * CQ.trace());
    CHECK((DP - Matrix(DP.diagonal().asDiagonal())).cwiseAbs().maxCoeff() <= 1e-10 * CP.trace());
    CHECK(DQ.diagonal().minCoeff() >= -1e-12);
  }
}

TEST_CASE("factor templates do not depend on the product kind") {
  const FilterSpec h({1.0, 0.5});
  const std::vector<Adjacency> f{graphs::erdos_renyi(4, 0.6, 21, kUniform), graphs::erdos_renyi(3, 1.0, 22, kUniform)};
  std::vector<Matrix> vq;
  for (ProductKind kind : {ProductKind::Cartesian, ProductKind::Kronecker, ProductKind::Strong}) {
    const Matrix C = population_covariance(f, kind, h);
    vq.push_back(linalg::sym_evd(oracle::partial_trace(C, {3, 4}, 0)).V);
  }
  // Each template column lines up with a true factor eigenvector, whatever the order.
  for (const Matrix& V : vq) CHECK(oracle::worst_column_angle(V, factor_basis(f[1])) < 1e-6);
}

TEST_CASE("estimated two-factor templates approach the truth") {
  const std::vector<Adjacency> f{graphs::erdos_renyi(3, 0.7, 5, kUniform), graphs::erdos_renyi(2, 1.0, 6, kUniform)};
  const Adjacency W = graphs::graph_product(f, ProductKind::Cartesian);
  const SignalBatch b = diffusion::generate_diffused(W, FilterSpec({1.0, 0.5}), 100000, 7, {3, 2});
  const spectral::FactorTemplates2 t = spectral::factor_templates_2(b);
  CHECK(t.P.V.rows() == 3);
  CHECK(t.Q.V.rows() == 2);
  CHECK(t.P.factor == 1);
  CHECK(t.Q.factor == 2);
  CHECK(oracle::worst_column_angle(t.Q.V, factor_basis(f[1])) <= 0.05);
  CHECK(oracle::worst_column_angle(t.P.V, factor_basis(f[0])) <= 0.05);
  const Matrix CQ = spectral::mode_second_moment(b, 1);
  CHECK(oracle::offdiag_energy(factor_basis(f[1]).transpose() * CQ * factor_basis(f[1])) <= 0.05);

  const std::vector<SpectralTemplate> n2 = spectral::factor_templates_n(b);
  CHECK(n2[0].V == t.P.V);
  CHECK(n2[1].V == t.Q.V);
}

TEST_CASE("white signals give an uninformative but valid template") {
  const Adjacency W = graphs::erdos_renyi(6, 0.5, 3);
  const SignalBatch b = diffusion::generate_diffused(W, FilterSpec({1.0}), 20000, 8, {3, 2});
  const spectral::FactorTemplates2 t = spectral::factor_templates_2(b);
  const Matrix CQ = spectral::mode_second_moment(b, 1);
  CHECK((CQ - 3.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.1);
  CHECK((t.Q.V.transpose() * t.Q.V - Matrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("three-factor templates") {
  const std::vector<Adjacency> f{graphs::erdos_renyi(3, 0.7, 31, kUniform), graphs::erdos_renyi(2, 1.0, 32, kUniform),
                                 graphs::erdos_renyi(2, 1.0, 33, kUniform)};
  const Adjacency W = graphs::graph_product(f, ProductKind::Strong);
  const SignalBatch b = diffusion::generate_diffused(W, FilterSpec({1.0, 0.5}), 100000, 9, {3, 2, 2});
  const std::vector<SpectralTemplate> t = spectral::factor_templates_n(b);
  REQUIRE(t.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t[i].factor == static_cast<int>(i + 1));
    CHECK(oracle::worst_column_angle(t[i].V, factor_basis(f[i])) <= 0.05);
    const Index mode = 3 - static_cast<Index>(i);
    const Matrix C = spectral::mode_second_moment(b, mode);
    CHECK(oracle::offdiag_energy(factor_basis(f[i]).transpose() * C * factor_basis(f[i])) <= 0.05);
  }

  std::vector<Tensor> tensors;
  for (Index c = 0; c < 50; ++c) {
    const Vector x = b.signals().col(c);
    const Index dims[] = {3, 2, 2};
    tensors.push_back(diffusion::reshape_tensor(x, dims));
  }
  const Index dims[] = {3, 2, 2};
  const std::vector<SpectralTemplate> from_tensors = spectral::factor_templates_n(tensors, dims);
  const SignalBatch head(b.signals().leftCols(50), {3, 2, 2});
  const std::vector<SpectralTemplate> from_batch = spectral::factor_templates_n(head);
  for (std::size_t i = 0; i < 3; ++i) CHECK(from_tensors[i].V == from_batch[i].V);
}

TEST_CASE("repeated eigenvalues are flagged") {
  const SpectralTemplate t = spectral::template_from_covariance(Matrix::Identity(3, 3), TemplateSource::Full);
  CHECK(t.degenerate_spectrum);
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 1, 2, 3;
  CHECK_FALSE(spectral::template_from_covariance(D, TemplateSource::Full).degenerate_spectrum);
}
