#include "prodgraph/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "prodgraph/error.hpp"

namespace prodgraph::experiment {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Prod: return "prod";
    case Method::Ho: return "ho";
    case Method::Hd: return "hd";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "prod") return Method::Prod;
  if (name == "ho") return Method::Ho;
  if (name == "hd") return Method::Hd;
  throw ValidationError("unknown method '" + std::string(name) + "' (expected prod, ho or hd)");
}

Index ExperimentConfig::nodes() const {
  Index n = 1;
  for (Index p : dims) n *= p;
  return n;
}

void ExperimentConfig::validate() const {
  detail::require(dims.size() >= 2, "config: dims needs at least two factors");
  for (Index p : dims) detail::require(p >= 2, "config: every factor size must be >= 2");
  detail::require(p_er >= 0.0 && p_er <= 1.0, "config: p_er must be in [0, 1]");
  (void)FilterSpec(filter);
  detail::require(!T.empty(), "config: T list is empty");
  for (Index t : T) detail::require(t >= 1, "config: every T must be >= 1");
  detail::require(!snr_db.empty(), "config: snr_db list is empty");
  for (double s : snr_db) detail::require(std::isfinite(s) || s == diffusion::kNoNoise, "config: bad snr_db");
  detail::require(!seeds.empty(), "config: seeds list is empty");
  detail::require(!thresholds.empty(), "config: thresholds list is empty");
  for (double t : thresholds) detail::require(t > 0.0 && t < 1.0, "config: thresholds must be in (0, 1)");
  detail::require(!methods.empty(), "config: methods list is empty");
  for (Method m : methods)
    detail::require(m != Method::Prod || dims.size() == 2, "config: method prod needs exactly two factors");
  for (const auto& s : sweep) {
    detail::require(s.size() == dims.size(), "config: sweep entries must have as many factors as dims");
    for (Index p : s) detail::require(p >= 1, "config: sweep factor sizes must be positive");
  }
  detail::require(weights.mode == graphs::EdgeWeights::Mode::Unit ||
                      (weights.low > 0.0 && weights.high >= weights.low),
                  "config: need 0 < weight_low <= weight_high");
  detail::require(jobs >= 1, "config: jobs must be >= 1");
  solver.validate();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ValidationError("config: " + key + ": bad number '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] != '-') out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ValidationError("config: " + key + ": bad integer '" + v + "'");
  return out;
}

Index to_index(const std::string& key, const std::string& v) {
  const std::uint64_t u = to_u64(key, v);
  detail::require(u <= static_cast<std::uint64_t>(std::numeric_limits<int>::max()), "config: " + key + ": too large");
  return static_cast<Index>(u);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config: " + key + ": expected on/off, got '" + v + "'");
}

template <typename F>
auto list_of(const std::string& key, const std::string& v, F conv) {
  std::vector<decltype(conv(key, v))> out;
  if (v.empty()) return out;
  for (const std::string& item : split(v, ',')) out.push_back(conv(key, item));
  return out;
}

std::vector<Index> parse_dims(const std::string& key, const std::string& v) {
  return list_of(key, v, to_index);
}

std::vector<Index> parse_shape(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  for (const std::string& part : split(v, 'x')) out.push_back(to_index(key, part));
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  bool paper_rho = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string v = trim(std::string_view(body).substr(eq + 1));

    if (key == "dims") cfg.dims = parse_dims(key, v);
    else if (key == "kind") cfg.kind = parse_product_kind(v);
    else if (key == "p_er") cfg.p_er = to_double(key, v);
    else if (key == "filter") cfg.filter = list_of(key, v, to_double);
    else if (key == "T") cfg.T = parse_dims(key, v);
    else if (key == "snr_db") cfg.snr_db = list_of(key, v, to_double);
    else if (key == "seeds") cfg.seeds = list_of(key, v, to_u64);
    else if (key == "thresholds") cfg.thresholds = list_of(key, v, to_double);
    else if (key == "methods") {
      cfg.methods.clear();
      for (const std::string& m : split(v, ',')) cfg.methods.push_back(parse_method(m));
    }
    else if (key == "rho0") cfg.solver.rho0 = to_double(key, v);
    else if (key == "rho_growth") cfg.solver.rho_growth = to_double(key, v);
    else if (key == "rho_max") cfg.solver.rho_max = to_double(key, v);
    else if (key == "max_iter") cfg.solver.max_iter = static_cast<int>(to_index(key, v));
    else if (key == "primal_tol") cfg.solver.primal_tol = to_double(key, v);
    else if (key == "step_tol") cfg.solver.step_tol = to_double(key, v);
    else if (key == "diag_weight") cfg.solver.diag_weight = to_double(key, v);
    else if (key == "paper_literal_rho") paper_rho = to_bool(key, v);
    else if (key == "weights") {
      if (v == "unit") cfg.weights.mode = graphs::EdgeWeights::Mode::Unit;
      else if (v == "uniform") cfg.weights.mode = graphs::EdgeWeights::Mode::Uniform;
      else throw ValidationError("config: weights: expected unit or uniform");
    }
    else if (key == "weight_low") cfg.weights.low = to_double(key, v);
    else if (key == "weight_high") cfg.weights.high = to_double(key, v);
    else if (key == "snr_mode") {
      if (v == "batch") cfg.snr_mode = diffusion::SnrMode::Batch;
      else if (v == "per_signal") cfg.snr_mode = diffusion::SnrMode::PerSignal;
      else throw ValidationError("config: snr_mode: expected batch or per_signal");
    }
    else if (key == "sweep") {
      cfg.sweep.clear();
      if (!v.empty())
        for (const std::string& s : split(v, ',')) cfg.sweep.push_back(parse_shape(key, s));
    }
    else if (key == "timing") cfg.timing = to_bool(key, v);
    else if (key == "jobs") cfg.jobs = static_cast<int>(to_index(key, v));
    else if (key == "output") cfg.output = v;
    else throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (paper_rho) cfg.solver = solver::paper_literal_rho(cfg.solver);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over the combined words
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

Truth make_truth(const ExperimentConfig& cfg, std::uint64_t seed) {
  Truth t;
  for (std::size_t i = 0; i < cfg.dims.size(); ++i)
    t.factors.push_back(graphs::erdos_renyi(cfg.dims[i], cfg.p_er, derive_seed(seed, 1, i), cfg.weights));
  t.product = graphs::graph_product(t.factors, cfg.kind);
  return t;
}

SignalBatch make_signals(const ExperimentConfig& cfg, const Truth& truth, Index T, double snr_db, std::uint64_t seed) {
  const SignalBatch clean =
      diffusion::generate_diffused(truth.product, FilterSpec(cfg.filter), T, derive_seed(seed, 2), cfg.dims);
  if (snr_db == diffusion::kNoNoise) return clean;
  return diffusion::add_noise_snr(clean, snr_db, derive_seed(seed, 3, static_cast<std::uint64_t>(T)), cfg.snr_mode);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Learned {
  std::vector<Adjacency> graphs;  // one per factor, or a single product graph for hd
  std::vector<int> iters;
  std::vector<double> seconds;
  std::string status = "ok";
};

Learned learn(Method m, const SignalBatch& batch, const std::vector<Index>& dims, const solver::SolverConfig& cfg) {
  Learned out;
  try {
    std::vector<pipelines::FactorResult> res;
    if (m == Method::Prod)
      res = pipelines::prodspectemp(batch, dims[0], dims[1], cfg);
    else if (m == Method::Ho)
      res = pipelines::ho_prodspectemp(batch, dims, cfg);
    else
      res.push_back(pipelines::hd_spectemp(batch, cfg));
    for (const auto& r : res) {
      out.graphs.push_back(r.result.adjacency);
      out.iters.push_back(r.result.iterations);
      out.seconds.push_back(r.seconds);
      if (!r.result.converged) out.status = "nonconverged";
    }
  } catch (const SolverDivergence&) {
    out.status = "diverged";
  } catch (const ValidationError&) {
    out.status = "invalid";
  }
  return out;
}

void score(BenchRow base, const Adjacency& truth, const Adjacency* est, const ExperimentConfig& cfg,
           std::vector<BenchRow>& rows) {
  double auc = kNaN, l2 = kNaN;
  if (est) {
    auc = analysis::auc_score(truth, *est).value_or(kNaN);
    if (truth.weights().maxCoeff() > 0.0) l2 = analysis::edge_l2_error(truth, *est);
  }
  for (double thr : cfg.thresholds) {
    BenchRow r = base;
    r.thr_rel = thr;
    r.f1 = est ? analysis::f1_score(truth, *est, thr) : kNaN;
    r.auc = auc;
    r.l2err = l2;
    rows.push_back(std::move(r));
  }
}

std::vector<BenchRow> run_cell(const ExperimentConfig& cfg, std::uint64_t seed, Index T, double snr) {
  std::vector<BenchRow> rows;
  const Truth truth = make_truth(cfg, seed);
  const SignalBatch batch = make_signals(cfg, truth, T, snr, seed);
  const Index n = static_cast<Index>(cfg.dims.size());
  const Index N = cfg.nodes();

  for (Method m : cfg.methods) {
    std::vector<std::vector<Index>> shapes{cfg.dims};
    if (m != Method::Hd)
      for (const auto& s : cfg.sweep) {
        Index prod = 1;
        for (Index p : s) prod *= p;
        const bool usable = prod == N && std::all_of(s.begin(), s.end(), [](Index p) { return p >= 2; });
        if (usable && s != cfg.dims) shapes.push_back(s);
      }
    for (const auto& shape : shapes) {
      const Learned L = learn(m, batch, shape, cfg.solver);
      BenchRow base;
      base.method = std::string(to_string(m));
      base.kind = std::string(to_string(cfg.kind));
      base.dims = shape;
      base.T = T;
      base.snr_db = snr;
      base.seed = seed;
      base.status = L.status;
      const bool ok = !L.graphs.empty();

      if (m != Method::Hd && shape == cfg.dims) {
        for (Index f = 0; f < n; ++f) {
          BenchRow r = base;
          r.target = "factor" + std::to_string(f + 1);
          if (ok) {
            r.iters = L.iters[f];
            r.seconds = cfg.timing ? L.seconds[f] : 0.0;
          }
          score(r, truth.factors[f], ok ? &L.graphs[f] : nullptr, cfg, rows);
        }
      }
      BenchRow r = base;
      r.target = "product";
      std::optional<Adjacency> est;
      if (ok) {
        for (std::size_t i = 0; i < L.iters.size(); ++i) {
          r.iters += L.iters[i];
          r.seconds += cfg.timing ? L.seconds[i] : 0.0;
        }
        est = m == Method::Hd ? L.graphs[0] : pipelines::assemble_product(L.graphs, cfg.kind);
      }
      score(r, truth.product, est ? &*est : nullptr, cfg, rows);
    }
  }
  return rows;
}

int target_rank(const std::string& t) {
  if (t == "product") return std::numeric_limits<int>::max();
  return std::stoi(t.substr(6));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<BenchRow> run_bench(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Cell {
    std::uint64_t seed;
    Index T;
    double snr;
  };
  std::vector<Cell> cells;
  for (std::uint64_t s : cfg.seeds)
    for (Index t : cfg.T)
      for (double snr : cfg.snr_db) cells.push_back({s, t, snr});

  std::vector<std::vector<BenchRow>> parts(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  const long count = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs)
  for (long i = 0; i < count; ++i) {
    try {
      parts[i] = run_cell(cfg, cells[i].seed, cells[i].T, cells[i].snr);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<BenchRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  auto key = [](const BenchRow& r) {
    return std::make_tuple(std::cref(r.method), std::cref(r.kind), std::cref(r.dims), r.T, r.snr_db, r.seed,
                           target_rank(r.target), r.thr_rel);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const BenchRow& a, const BenchRow& b) { return key(a) < key(b); });
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  const std::size_t n = rows.empty() ? 0 : rows.front().dims.size();
  out << "method,kind";
  for (std::size_t i = 0; i < n; ++i) out << ",P" << i + 1;
  out << ",T,snr_db,seed,target,thr_rel,f1,auc,l2err,iters,seconds,status\n";
  for (const BenchRow& r : rows) {
    out << r.method << ',' << r.kind;
    for (Index p : r.dims) out << ',' << p;
    out << ',' << r.T << ',' << fmt(r.snr_db) << ',' << r.seed << ',' << r.target << ',' << fmt(r.thr_rel) << ','
        << fmt(r.f1) << ',' << fmt(r.auc) << ',' << fmt(r.l2err) << ',' << r.iters << ',' << fmt(r.seconds) << ','
        << r.status << '\n';
  }
}

std::vector<SynthEntry> run_synth(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<SynthEntry> entries;
  for (std::uint64_t seed : cfg.seeds) {
    const Truth truth = make_truth(cfg, seed);
    const fs::path dir = out_dir / ("seed" + std::to_string(seed));
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<fs::path> factor_files;
    for (std::size_t i = 0; i < truth.factors.size(); ++i) {
      factor_files.push_back(dir / ("factor" + std::to_string(i + 1) + ".adj"));
      graphs::write_adjacency(factor_files.back(), truth.factors[i]);
    }
    const fs::path product = dir / "product.adj";
    graphs::write_adjacency(product, truth.product);
    for (Index T : cfg.T)
      for (double snr : cfg.snr_db) {
        SynthEntry e;
        e.signals = dir / ("signals_T" + std::to_string(T) + "_snr" + fmt(snr) + ".pgsb");
        diffusion::write_batch(e.signals, make_signals(cfg, truth, T, snr, seed));
        e.product = product;
        e.factors = factor_files;
        e.seed = seed;
        e.T = T;
        e.snr_db = snr;
        entries.push_back(std::move(e));
      }
  }

  const fs::path manifest = out_dir / "manifest.csv";
  std::ofstream out(manifest);
  if (!out) throw IoError("cannot write " + manifest.string());
  std::string dims, filter;
  for (Index p : cfg.dims) dims += (dims.empty() ? "" : "x") + std::to_string(p);
  for (double h : cfg.filter) filter += (filter.empty() ? "" : ";") + fmt(h);
  out << "signals,seed,T,snr_db,kind,dims,p_er,filter,product";
  for (std::size_t i = 0; i < cfg.dims.size(); ++i) out << ",factor" << i + 1;
  out << '\n';
  for (const SynthEntry& e : entries) {
    out << fs::relative(e.signals, out_dir).generic_string() << ',' << e.seed << ',' << e.T << ',' << fmt(e.snr_db)
        << ',' << to_string(cfg.kind) << ',' << dims << ',' << fmt(cfg.p_er) << ',' << filter << ','
        << fs::relative(e.product, out_dir).generic_string();
    for (const auto& f : e.factors) out << ',' << fs::relative(f, out_dir).generic_string();
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + manifest.string());
  return entries;
}

namespace {

nlohmann::json solve_json(const pipelines::FactorResult& r) {
  const solver::LearnResult& L = r.result;
  return {{"factor", r.factor},
          {"nodes", L.adjacency.nodes()},
          {"iterations", L.iterations},
          {"converged", L.converged},
          {"model_residual", L.model_residual},
          {"split_residual", L.split_residual},
          {"hollow_residual", L.hollow_residual},
          {"objective", L.objective},
          {"variables", L.variables},
          {"seconds", r.seconds},
          {"diagnostic", L.diagnostic}};
}

nlohmann::json solver_json(const solver::SolverConfig& c) {
  return {{"rho0", c.rho0},           {"rho_growth", c.rho_growth}, {"rho_max", c.rho_max},
          {"max_iter", c.max_iter},   {"primal_tol", c.primal_tol}, {"step_tol", c.step_tol},
          {"diag_weight", c.diag_weight}};
}

}  // namespace

std::string run_learn(const LearnRequest& req) {
  namespace fs = std::filesystem;
  req.solver.validate();
  const SignalBatch raw = diffusion::read_batch(req.input);
  const std::vector<Index> dims = req.dims.empty() ? raw.shape() : req.dims;
  const SignalBatch batch(raw.signals(), dims);

  std::vector<pipelines::FactorResult> results;
  std::vector<std::string> names;
  if (req.method == Method::Hd) {
    results.push_back(pipelines::hd_spectemp(batch, req.solver));
    names.push_back("graph.adj");
  } else {
    if (req.method == Method::Prod) {
      detail::require(dims.size() == 2, "learn: method prod needs exactly two factor sizes");
      results = pipelines::prodspectemp(batch, dims[0], dims[1], req.solver);
    } else {
      results = pipelines::ho_prodspectemp(batch, dims, req.solver);
    }
    for (const auto& r : results) names.push_back("factor" + std::to_string(r.factor) + ".adj");
  }

  nlohmann::json summary;
  summary["method"] = std::string(to_string(req.method));
  summary["input"] = req.input.generic_string();
  summary["dims"] = dims;
  summary["signals"] = batch.count();
  summary["nodes"] = batch.length();
  summary["solver"] = solver_json(req.solver);
  Index variables = 0;
  nlohmann::json solves = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    nlohmann::json s = solve_json(results[i]);
    s["file"] = names[i];
    variables += results[i].result.variables;
    solves.push_back(std::move(s));
  }
  summary["solves"] = std::move(solves);
  summary["variables"] = variables;
  const std::string text = summary.dump(2) + "\n";

  std::error_code ec;
  fs::create_directories(req.out_dir, ec);
  if (ec) throw IoError("cannot create " + req.out_dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < results.size(); ++i)
    graphs::write_adjacency(req.out_dir / names[i], results[i].result.adjacency);
  const fs::path path = req.out_dir / "summary.json";
  std::ofstream out(path);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
  return text;
}

RecoveryOutcome run_check_recovery(const RecoveryRequest& req) {
  detail::require(req.graph.has_value() != req.template_.has_value(),
                  "check-recovery: give exactly one of a graph file or a template file");
  Matrix V;
  Vector w;
  std::string source;
  if (req.graph) {
    const Adjacency W = graphs::read_adjacency(*req.graph);
    detail::require(W.nodes() >= 2, "check-recovery: need at least 2 nodes");
    V = linalg::sym_evd(W.weights()).V;
    w = linalg::vechn(W.weights()).entries();
    source = "graph";
  } else {
    std::ifstream in(*req.template_);
    if (!in) throw IoError("cannot open " + req.template_->string());
    V = graphs::read_square_matrix(in);
    detail::require(V.rows() >= 2, "check-recovery: need at least 2 nodes");
    // The conditions concern the off-diagonal l1 problem, so the candidate support comes
    // from that problem without the diagonal penalty.
    solver::SolverConfig cfg = req.solver;
    cfg.diag_weight = 0.0;
    SpectralTemplate t;
    t.V = V;
    w = solver::spectemp_ialm(t, cfg).w;
    source = "template";
  }
  const std::vector<Index> support = analysis::support_of(w, 1e-6);

  RecoveryOutcome out;
  out.report = analysis::check_recovery(V, support);
  const analysis::RecoveryReport& r = out.report;
  nlohmann::json j = {{"source", source},
                      {"nodes", V.rows()},
                      {"condA1", r.condA1},
                      {"rank_RZc", r.rank_RZc},
                      {"card_Zc", r.card_Zc},
                      {"condA2", r.condA2},
                      {"psi_min", std::isfinite(r.psi_min) ? nlohmann::json(r.psi_min) : nlohmann::json(nullptr)},
                      {"delta_at_min", r.delta_at_min},
                      {"feasible", r.feasible},
                      {"holds", r.holds()},
                      {"skipped_deltas", r.skipped_deltas},
                      {"support", support},
                      {"diagnostic", r.diagnostic}};
  out.json = j.dump(2) + "\n";
  return out;
}

}  // namespace prodgraph::experiment
