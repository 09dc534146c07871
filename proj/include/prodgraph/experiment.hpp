#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prodgraph/analysis.hpp"
#include "prodgraph/diffusion.hpp"
#include "prodgraph/graphs.hpp"
#include "prodgraph/pipelines.hpp"
#include "prodgraph/solver.hpp"

namespace prodgraph::experiment {

enum class Method { Prod, Ho, Hd };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

// Flat key = value file, one key per line, lists comma separated, '#' starts a comment.
// See README.md for the keys.
struct ExperimentConfig {
  std::vector<Index> dims{15, 10};
  ProductKind kind = ProductKind::Cartesian;
  double p_er = 0.3;
  std::vector<double> filter{1.0, 0.5};
  std::vector<Index> T{100, 1000, 10000};
  std::vector<double> snr_db{-20.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<double> thresholds{0.1};
  std::vector<Method> methods{Method::Prod};
  solver::SolverConfig solver;
  graphs::EdgeWeights weights;
  diffusion::SnrMode snr_mode = diffusion::SnrMode::Batch;
  // Learn with these factorizations of N instead of the true dims; only the product is scored.
  std::vector<std::vector<Index>> sweep;
  // Wall-clock goes in the seconds column only when on; otherwise 0 so the CSV is a pure
  // function of the config.
  bool timing = false;
  int jobs = 1;
  std::string output = "bench.csv";

  Index nodes() const;
  void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

// Seed of an independent stream derived from a realization seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

struct Truth {
  std::vector<Adjacency> factors;
  Adjacency product;
};

// Factor i uses stream (seed, 1, i); the product kind does not affect the factors.
Truth make_truth(const ExperimentConfig& cfg, std::uint64_t seed);

// Innovations depend only on the seed, so the same seed gives identical innovations for
// every product kind and the first T columns are shared between sample sizes.
SignalBatch make_signals(const ExperimentConfig& cfg, const Truth& truth, Index T, double snr_db, std::uint64_t seed);

struct BenchRow {
  std::string method;
  std::string kind;
  std::vector<Index> dims;  // dims the method learned with
  Index T = 0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::string target;  // factor1..factorn or product
  double thr_rel = 0.0;
  double f1 = 0.0;
  double auc = 0.0;  // NaN when undefined
  double l2err = 0.0;
  int iters = 0;
  double seconds = 0.0;
  std::string status;  // ok, nonconverged, diverged, invalid
};

std::vector<BenchRow> run_bench(const ExperimentConfig& cfg);
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

struct SynthEntry {
  std::filesystem::path signals;
  std::filesystem::path product;
  std::vector<std::filesystem::path> factors;
  std::uint64_t seed = 0;
  Index T = 0;
  double snr_db = 0.0;
};

// One signal file per (seed, T, snr), truth graphs per seed, and manifest.csv.
std::vector<SynthEntry> run_synth(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct LearnRequest {
  std::filesystem::path input;
  std::vector<Index> dims;  // empty: take the dims stored with the signals
  Method method = Method::Prod;
  solver::SolverConfig solver;
  std::filesystem::path out_dir;
};

// Writes one adjacency file per learned graph and summary.json; returns the summary text.
// Inputs are validated and all results computed before anything is written.
std::string run_learn(const LearnRequest& req);

struct RecoveryRequest {
  std::optional<std::filesystem::path> graph;     // truth support + its eigenvectors
  std::optional<std::filesystem::path> template_;  // support from an l1 solve
  solver::SolverConfig solver;
};

struct RecoveryOutcome {
  analysis::RecoveryReport report;
  std::string json;
};

RecoveryOutcome run_check_recovery(const RecoveryRequest& req);

}  // namespace prodgraph::experiment
