#pragma once

#include <string>

#include "prodgraph/error.hpp"
#include "prodgraph/graphs.hpp"
#include "prodgraph/linalg.hpp"
#include "prodgraph/spectral.hpp"

namespace prodgraph::solver {

struct SolverConfig {
  double rho0 = 1.0;
  // rho <- min(rho * rho_growth, rho_max) after every iteration.
  double rho_growth = 1.01;
  double rho_max = 5.0;
  int max_iter = 10000;
  // Converged when ||w - Phi lambda||_inf, ||w - s||_inf and (with the hollow constraint)
  // ||diag(V diag(lambda) V^T)||_inf are all <= primal_tol and the last w step is
  // <= step_tol * max(1, ||w||_inf).
  double primal_tol = 1e-7;
  double step_tol = 1e-9;
  // Scale of the hollow constraint diag(V diag(lambda) V^T) = 0 inside the augmented
  // Lagrangian. Any positive value gives the same solution set; zero drops the constraint
  // and solves the pure off-diagonal model w = Phi lambda.
  double diag_weight = 1.0;

  void validate() const;
};

// The per-iteration growth factor of 10^3 applied literally, capped at 1e8.
SolverConfig paper_literal_rho(SolverConfig base);

struct SolverState {
  Vector w;
  Vector s;
  Vector gamma1;
  Vector gamma2;
  Vector gamma3;  // hollow constraint; empty when diag_weight is 0
  Vector lambda;
  double rho = 0.0;
  int k = 0;
};

struct LearnResult {
  Adjacency adjacency;  // unvechn(w) with negative entries clamped to zero
  Vector w;
  Vector eigenvalues;  // lambda
  int iterations = 0;
  bool converged = false;
  double model_residual = 0.0;  // ||w - Phi lambda||_inf
  double split_residual = 0.0;  // ||w - s||_inf
  double hollow_residual = 0.0;  // ||diag(V diag(lambda) V^T)||_inf
  double objective = 0.0;       // ||w||_1
  Index variables = 0;          // N(N-1)/2 + N
  std::string diagnostic;       // empty when converged on a clean template
};

// Carries the last finite state when an iterate turns NaN or Inf.
class DivergenceError : public SolverDivergence {
 public:
  DivergenceError(const std::string& what, SolverState last) : SolverDivergence(what), last_(std::move(last)) {}
  const SolverState& last_state() const { return last_; }

 private:
  SolverState last_;
};

// Inexact augmented Lagrangian solve of min ||w||_1 s.t. w = Phi lambda, w = s, s in W_r,
// and diag(V diag(lambda) V^T) = 0 unless diag_weight is 0.
LearnResult spectemp_ialm(const SpectralTemplate& tmpl, const SolverConfig& cfg = {});

// ||w||_1
double objective_value(const Vector& w);

// N(N-1)/2 + N
constexpr Index optimization_variables(Index n) { return linalg::edge_slots(n) + n; }

}  // namespace prodgraph::solver
