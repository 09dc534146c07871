// prodgraph: learn product-graph factors from stationary graph signals.
//
//   prodgraph synth --config exp.cfg --out data/
//   prodgraph learn --input data/seed1/signals_T1000_snr-20.pgsb --method prod --out learned/
//   prodgraph bench --config exp.cfg --out results.csv --jobs 4
//   prodgraph check-recovery --graph truth.adj
//
// Exit codes: 0 ok, 1 recovery conditions do not hold (check-recovery only),
// 2 validation, 3 solver divergence, 4 I/O.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "prodgraph/error.hpp"
#include "prodgraph/experiment.hpp"
#include "prodgraph/kernels.hpp"

namespace {

using namespace prodgraph;

struct SolverFlags {
  std::optional<double> rho_growth;
  bool paper_literal_rho = false;
  std::optional<double> diag_weight;
  std::optional<int> max_iter;

  void add(CLI::App* app) {
    app->add_option("--rho-growth", rho_growth, "Penalty growth factor per iteration")->check(CLI::PositiveNumber);
    app->add_flag("--paper-literal-rho", paper_literal_rho, "Grow rho by 10^3 per iteration, capped at 1e8");
    app->add_option("--diag-weight", diag_weight, "Scale of the hollow constraint (0 drops it)");
    app->add_option("--max-iter", max_iter, "Iteration budget per solve");
  }

  solver::SolverConfig apply(solver::SolverConfig c) const {
    if (paper_literal_rho) c = solver::paper_literal_rho(c);
    if (rho_growth) c.rho_growth = *rho_growth;
    if (diag_weight) c.diag_weight = *diag_weight;
    if (max_iter) c.max_iter = *max_iter;
    c.validate();
    return c;
  }
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> method;
  std::optional<double> thr_rel;
  std::optional<int> jobs;
  SolverFlags solver;
};

experiment::ExperimentConfig load(const Common& c) {
  experiment::ExperimentConfig cfg = c.config.empty() ? experiment::ExperimentConfig{} : experiment::load_config(c.config);
  if (c.seed) cfg.seeds = {*c.seed};
  if (c.method) cfg.methods = {experiment::parse_method(*c.method)};
  if (c.thr_rel) cfg.thresholds = {*c.thr_rel};
  if (c.jobs) cfg.jobs = *c.jobs;
  if (!c.out.empty()) cfg.output = c.out;
  cfg.solver = c.solver.apply(cfg.solver);
  cfg.validate();
  return cfg;
}

int cmd_synth(const Common& c) {
  const auto cfg = load(c);
  const std::string dir = c.out.empty() ? "synth" : c.out;
  const auto entries = experiment::run_synth(cfg, dir);
  std::cout << "wrote " << entries.size() << " signal files and " << dir << "/manifest.csv\n";
  return 0;
}

int cmd_bench(const Common& c) {
  const auto cfg = load(c);
  if (cfg.jobs > 1) kernels::set_threads(1);
  const auto rows = experiment::run_bench(cfg);
  std::ofstream out(cfg.output);
  if (!out) throw IoError("cannot write " + cfg.output);
  experiment::write_bench_csv(out, rows);
  if (!out) throw IoError("write failed: " + cfg.output);
  std::cout << "wrote " << rows.size() << " rows to " << cfg.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn product-graph factors from spectral templates"};
  app.require_subcommand(1);

  Common synth, bench, learn;
  auto add_common = [](CLI::App* sub, Common& c, bool with_config) {
    if (with_config) sub->add_option("--config", c.config, "Experiment config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Run a single realization seed");
    sub->add_option("--out", c.out, "Output path");
    sub->add_option("--method", c.method, "prod, ho or hd")->check(CLI::IsMember({"prod", "ho", "hd"}));
    sub->add_option("--thr-rel", c.thr_rel, "Relative binarization threshold for F1");
    sub->add_option("--jobs", c.jobs, "Parallel realizations")->check(CLI::PositiveNumber);
    c.solver.add(sub);
  };

  auto* synth_cmd = app.add_subcommand("synth", "Generate ground-truth graphs and diffused signals");
  add_common(synth_cmd, synth, true);
  auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo benchmark to CSV");
  add_common(bench_cmd, bench, true);

  auto* learn_cmd = app.add_subcommand("learn", "Learn graphs from a signal file");
  std::string input;
  std::vector<Index> dims;
  learn_cmd->add_option("--input,input", input, "Signal file (.pgsb binary or .csv)")->required();
  learn_cmd->add_option("--dims", dims, "Factor sizes P1 P2 ... (default: from the file)")->delimiter(',');
  add_common(learn_cmd, learn, false);

  auto* check_cmd = app.add_subcommand("check-recovery", "Evaluate the sufficient recovery conditions");
  std::string graph_file, template_file, check_out;
  SolverFlags check_solver;
  auto* g = check_cmd->add_option("--graph", graph_file, "Adjacency file: its eigenvectors and edge support");
  auto* t = check_cmd->add_option("--template", template_file, "Template file (n, then n rows): support from the l1 solve");
  g->excludes(t);
  check_cmd->add_option("--out", check_out, "Write the JSON report here instead of stdout");
  check_solver.add(check_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*bench_cmd) return cmd_bench(bench);
    if (*learn_cmd) {
      experiment::LearnRequest req;
      req.input = input;
      req.dims = dims;
      req.method = experiment::parse_method(learn.method.value_or("prod"));
      req.solver = learn.solver.apply({});
      req.out_dir = learn.out.empty() ? "learned" : learn.out;
      std::cout << experiment::run_learn(req);
      return 0;
    }
    if (*check_cmd) {
      experiment::RecoveryRequest req;
      if (!graph_file.empty()) req.graph = graph_file;
      if (!template_file.empty()) req.template_ = template_file;
      req.solver = check_solver.apply({});
      const auto outcome = experiment::run_check_recovery(req);
      if (check_out.empty()) {
        std::cout << outcome.json;
      } else {
        std::ofstream out(check_out);
        if (!out || !(out << outcome.json)) throw IoError("cannot write " + check_out);
      }
      return outcome.report.holds() ? 0 : 1;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SolverDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
