#include "prodgraph/solver.hpp"

#include <cmath>
#include <sstream>

namespace prodgraph::solver {

void SolverConfig::validate() const {
  detail::require(rho0 > 0.0 && std::isfinite(rho0), "solver: rho0 must be positive");
  detail::require(rho_growth >= 1.0 && std::isfinite(rho_growth), "solver: rho_growth must be >= 1");
  detail::require(rho_max >= rho0 && std::isfinite(rho_max), "solver: rho_max must be >= rho0");
  detail::require(max_iter >= 1, "solver: max_iter must be >= 1");
  detail::require(primal_tol > 0.0, "solver: primal_tol must be positive");
  detail::require(step_tol > 0.0, "solver: step_tol must be positive");
  detail::require(diag_weight >= 0.0 && std::isfinite(diag_weight), "solver: diag_weight must be >= 0");
}

SolverConfig paper_literal_rho(SolverConfig base) {
  base.rho_growth = 1e3;
  base.rho_max = 1e8;
  return base;
}

double objective_value(const Vector& w) { return w.lpNorm<1>(); }

namespace {

// lambda-step: argmin ||Phi lambda - b||^2 + ||sqrt(mu) (V .* V) lambda - c||^2.
// (V .* V) lambda is the diagonal of V diag(lambda) V^T.
class LambdaStep {
 public:
  LambdaStep(const linalg::PhiOperator& phi, const Matrix& V, double mu) : phi_(phi), mu_(mu) {
    if (mu_ > 0.0) {
      const Index m = phi.slots();
      const Index n = phi.nodes();
      Matrix stacked(m + n, n);
      stacked.topRows(m) = phi.matrix();
      stacked.bottomRows(n) = std::sqrt(mu_) * V.cwiseProduct(V);
      stacked_ = linalg::LeastSquares(stacked);
      rhs_ = Vector::Zero(m + n);
    }
  }

  Vector operator()(const Vector& b, const Vector& c) {
    if (mu_ == 0.0) return phi_.solve(b);
    rhs_.head(b.size()) = b;
    rhs_.tail(c.size()) = c;
    return stacked_.solve(rhs_);
  }

  bool hollow() const { return mu_ > 0.0; }
  double scale() const { return std::sqrt(mu_); }

 private:
  const linalg::PhiOperator& phi_;
  double mu_;
  linalg::LeastSquares stacked_;
  Vector rhs_;
};

bool finite(const SolverState& s) {
  return s.w.allFinite() && s.s.allFinite() && s.lambda.allFinite() && s.gamma1.allFinite() &&
         s.gamma2.allFinite() && s.gamma3.allFinite() &&
         std::isfinite(s.rho);
}

}  // namespace

LearnResult spectemp_ialm(const SpectralTemplate& tmpl, const SolverConfig& cfg) {
  cfg.validate();
  const Matrix& V = tmpl.V;
  detail::require(V.rows() == V.cols(), "spectemp_ialm: template is not square");
  detail::require(V.rows() >= 2, "spectemp_ialm: need at least 2 nodes");
  detail::require(V.allFinite(), "spectemp_ialm: template has non-finite entries");

  const Index n = V.rows();
  const Index m = linalg::edge_slots(n);
  const linalg::PhiOperator phi(V);
  LambdaStep lambda_step(phi, V, cfg.diag_weight);

  SolverState st;
  st.lambda = tmpl.covariance_eigenvalues && tmpl.covariance_eigenvalues->size() == n ? *tmpl.covariance_eigenvalues
                                                                                       : Vector::Zero(n);
  st.w = Vector::Zero(m);
  st.w.head(n - 1).setConstant(1.0 / static_cast<double>(n - 1));
  st.s = st.w;
  Vector phi_lambda = phi.apply(st.lambda);
  st.gamma1 = st.w - phi_lambda;
  st.gamma2 = st.w - st.s;
  const Matrix D = V.cwiseProduct(V);
  if (lambda_step.hollow()) st.gamma3 = Vector::Zero(n);
  st.rho = cfg.rho0;

  LearnResult out;
  out.variables = optimization_variables(n);
  SolverState last = st;
  double model_res = 0.0;
  double split_res = 0.0;
  double hollow_res = 0.0;
  bool converged = false;
  for (st.k = 0; st.k < cfg.max_iter;) {
    const double rho = st.rho;
    Vector w_next = linalg::soft_threshold((rho * phi_lambda + rho * st.s + st.gamma1 + st.gamma2) / (2.0 * rho),
                                           1.0 / (2.0 * rho));
    st.lambda = lambda_step(w_next - st.gamma1 / rho, -st.gamma3 / rho);
    st.s = linalg::project_wr(w_next - st.gamma2 / rho, n - 1);
    phi_lambda = phi.apply(st.lambda);
    const Vector r_model = w_next - phi_lambda;
    const Vector r_split = w_next - st.s;
    st.gamma1 -= rho * r_model;
    st.gamma2 -= rho * r_split;
    Vector r_hollow;
    if (lambda_step.hollow()) {
      r_hollow = D * st.lambda;
      st.gamma3 += rho * lambda_step.scale() * r_hollow;
    }
    const double step = (w_next - st.w).lpNorm<Eigen::Infinity>();
    st.w = std::move(w_next);
    st.rho = std::min(rho * cfg.rho_growth, cfg.rho_max);
    ++st.k;

    if (!finite(st)) {
      std::ostringstream os;
      os << "solver diverged at iteration " << st.k << " (non-finite iterate)";
      throw DivergenceError(os.str(), last);
    }
    last = st;

    model_res = r_model.lpNorm<Eigen::Infinity>();
    split_res = r_split.lpNorm<Eigen::Infinity>();
    hollow_res = r_hollow.size() ? r_hollow.lpNorm<Eigen::Infinity>() : 0.0;
    const double w_scale = std::max(1.0, st.w.lpNorm<Eigen::Infinity>());
    if (model_res <= cfg.primal_tol && split_res <= cfg.primal_tol && hollow_res <= cfg.primal_tol &&
        step <= cfg.step_tol * w_scale) {
      converged = true;
      break;
    }
  }

  out.w = st.w;
  out.eigenvalues = st.lambda;
  out.iterations = st.k;
  out.converged = converged;
  out.model_residual = model_res;
  out.split_residual = split_res;
  out.hollow_residual = hollow_res;
  out.objective = objective_value(st.w);
  out.adjacency = Adjacency(linalg::unvechn(linalg::HollowSymVec(st.w.cwiseMax(0.0))));

  std::ostringstream diag;
  if (!converged) {
    diag << "no convergence after " << st.k << " iterations: ||w - Phi lambda||_inf = " << model_res
         << ", ||w - s||_inf = " << split_res;
    if (lambda_step.hollow()) diag << ", ||diag||_inf = " << hollow_res;
    diag << " (the template may admit no nonnegative solution with node 1 degree 1)";
  }
  if (!phi.diagnostic().empty()) diag << (diag.tellp() > 0 ? "; " : "") << phi.diagnostic();
  if (tmpl.degenerate_spectrum) diag << (diag.tellp() > 0 ? "; " : "") << "template has repeated eigenvalues";
  out.diagnostic = diag.str();
  return out;
}

}  // namespace prodgraph::solver
