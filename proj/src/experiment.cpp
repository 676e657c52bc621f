#include "gpaf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gpaf/coupling.hpp"
#include "gpaf/ensemble.hpp"
#include "gpaf/graphstats.hpp"
#include "gpaf/theory.hpp"

namespace gpaf {

using nlohmann::json;

Mode parse_mode(const std::string& s) {
  if (s == "generate") return Mode::generate;
  if (s == "ensemble") return Mode::ensemble;
  if (s == "theory") return Mode::theory;
  if (s == "analyze") return Mode::analyze;
  if (s == "couple") return Mode::couple;
  if (s == "check-kernel") return Mode::check_kernel;
  throw std::invalid_argument("unknown mode '" + s +
                              "' (expected generate, ensemble, theory, analyze, couple or check-kernel)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::generate: return "generate";
    case Mode::ensemble: return "ensemble";
    case Mode::theory: return "theory";
    case Mode::analyze: return "analyze";
    case Mode::couple: return "couple";
    case Mode::check_kernel: return "check-kernel";
  }
  return "?";
}

void to_json(json& j, const ExperimentConfig& c) {
  j = {{"mode", to_string(c.mode)},
       {"params", c.params},
       {"replicas", c.replicas},
       {"snapshot_times", c.snapshot_times},
       {"outputs", c.outputs.string()},
       {"threads", c.threads},
       {"sampler", c.sampler == SamplerKind::fast ? "fast" : "exact"},
       {"k_min", c.k_min},
       {"k_max", c.k_max},
       {"bootstrap", c.bootstrap},
       {"tau", c.tau},
       {"diameter_method", c.diameter_method},
       {"mu", c.mu},
       {"L", c.L},
       {"input", c.input}};
  if (c.write_edges) j["write_edges"] = *c.write_edges;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

const std::set<std::string> kTopKeys = {
    "mode", "params", "replicas", "snapshot_times", "outputs", "threads", "sampler",
    "write_edges", "k_min", "k_max", "bootstrap", "tau", "diameter_method", "mu", "L", "input"};

class Reader {
 public:
  Reader(const json& obj, std::string prefix, std::vector<std::string>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {}

  template <class T>
  void field(const char* key, T& out, bool required = false) {
    if (!obj_.contains(key)) {
      if (required) errors_.push_back(prefix_ + key + ": required field is missing");
      return;
    }
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      errors_.push_back(prefix_ + key + ": wrong type (" + obj_.at(key).dump() + ")");
    }
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
};

bool is_integer(const json& v) { return v.is_number_integer() || v.is_number_unsigned(); }

}  // namespace

ConfigResult validate_config(const std::string& raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    ConfigResult r;
    r.errors.push_back(std::string("config is not valid JSON: ") + e.what());
    return r;
  }
  return validate_config(doc);
}

ConfigResult validate_config(const json& input) {
  ConfigResult r;
  auto& errors = r.errors;
  if (!input.is_object()) {
    errors.push_back("config must be a JSON object");
    return r;
  }
  // A manifest nests the configuration it was produced from.
  const json& doc = input.contains("config") && input.at("config").is_object() ? input.at("config")
                                                                                : input;
  for (const auto& [key, value] : doc.items()) {
    if (!kTopKeys.contains(key)) r.warnings.push_back("unknown field '" + key + "' ignored");
  }

  ExperimentConfig c;
  Reader top(doc, "", errors);
  std::string mode = "generate";
  top.field("mode", mode);
  try {
    c.mode = parse_mode(mode);
  } catch (const std::invalid_argument& e) {
    errors.push_back(std::string("mode: ") + e.what());
  }

  const bool params_needed = c.mode != Mode::analyze;
  if (!doc.contains("params")) {
    if (params_needed) errors.push_back("params: required field is missing");
  } else if (!doc.at("params").is_object()) {
    errors.push_back("params: must be an object");
  } else {
    const json& pj = doc.at("params");
    Reader pr(pj, "params.", errors);
    ProcessParams& p = c.params;
    for (const char* key : {"n", "m", "seed"}) {
      if (pj.contains(key) && !is_integer(pj.at(key))) {
        errors.push_back(std::string("params.") + key + ": must be an integer");
      }
    }
    if (pj.contains("seed") && pj.at("seed").is_number_integer() &&
        pj.at("seed").get<std::int64_t>() < 0) {
      errors.push_back("params.seed: must be a non-negative integer");
    } else if (!pj.contains("seed") || is_integer(pj.at("seed"))) {
      pr.field("seed", p.seed);
    }
    const bool growth = c.mode != Mode::check_kernel;
    const bool needs_n = c.mode != Mode::theory;
    if (!pj.contains("n") || is_integer(pj.at("n"))) pr.field("n", p.n, needs_n);
    if (!pj.contains("m") || is_integer(pj.at("m"))) pr.field("m", p.m, growth);
    pr.field("alpha", p.alpha, growth);
    pr.field("delta", p.delta);
    if (p.n < 1) errors.push_back("params.n: must satisfy n >= 1");
    if (p.m < 1) errors.push_back("params.m: must satisfy m >= 1");
    if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) {
      errors.push_back("params.alpha: must satisfy alpha > 0");
    }
    if (!(p.delta > -p.m) || !std::isfinite(p.delta)) {
      std::ostringstream msg;
      msg << "params.delta: must satisfy δ > −m (got delta = " << p.delta << ", m = " << p.m << ")";
      errors.push_back(msg.str());
    }
    if (pj.contains("kernel")) {
      try {
        p.kernel = pj.at("kernel").get<FitnessKernel>();
      } catch (const std::exception& e) {
        errors.push_back(std::string("params.kernel: ") + e.what());
      }
    }
    if (p.alpha <= 2.0 && (c.mode == Mode::theory || c.mode == Mode::ensemble)) {
      r.warnings.push_back("alpha <= 2: the limiting degree law needs alpha > 2, so no theory is produced");
    }
  }

  top.field("replicas", c.replicas);
  if (c.replicas < 1) errors.push_back("replicas: must satisfy replicas >= 1");
  top.field("snapshot_times", c.snapshot_times);
  for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
    const auto t = c.snapshot_times[i];
    if (t < 1 || t > c.params.n) {
      errors.push_back("snapshot_times: " + std::to_string(t) + " lies outside [1, n]");
    } else if (i > 0 && t <= c.snapshot_times[i - 1]) {
      errors.push_back("snapshot_times: must be strictly ascending");
    }
  }
  std::string outputs = c.outputs.string();
  top.field("outputs", outputs);
  c.outputs = outputs;
  if (outputs.empty()) errors.push_back("outputs: must name a directory");
  top.field("threads", c.threads);
  if (c.threads < 0) errors.push_back("threads: must be >= 0 (0 uses every core)");
  std::string sampler = "exact";
  top.field("sampler", sampler);
  if (sampler == "exact") {
    c.sampler = SamplerKind::exact;
  } else if (sampler == "fast") {
    c.sampler = SamplerKind::fast;
  } else {
    errors.push_back("sampler: must be 'exact' or 'fast'");
  }
  if (doc.contains("write_edges")) {
    bool w = false;
    top.field("write_edges", w);
    c.write_edges = w;
  }
  c.k_min = 5 * static_cast<std::int64_t>(c.params.m);
  top.field("k_min", c.k_min);
  if (c.k_min < 1) errors.push_back("k_min: must be >= 1");
  top.field("k_max", c.k_max);
  if (c.k_max < 2 * c.params.m) errors.push_back("k_max: must be >= 2m");
  top.field("bootstrap", c.bootstrap);
  if (c.bootstrap < 0) errors.push_back("bootstrap: must be >= 0");
  top.field("tau", c.tau);
  if (c.mode == Mode::couple && (c.tau < 1 || c.tau > c.params.n)) {
    errors.push_back("tau: must lie in [1, n]");
  }
  top.field("diameter_method", c.diameter_method);
  if (c.diameter_method != "none") {
    try {
      parse_diameter_method(c.diameter_method);
    } catch (const std::exception&) {
      errors.push_back("diameter_method: must be exact, ifub, sampled or none");
    }
  }
  top.field("mu", c.mu);
  if (!(c.mu > 0.0 && c.mu <= 1.0)) errors.push_back("mu: must lie in (0, 1]");
  top.field("L", c.L);
  if (!(c.L > 0.0)) errors.push_back("L: must be > 0");
  top.field("input", c.input);
  if (c.mode == Mode::analyze && c.input.empty()) {
    errors.push_back("input: analyze needs an edges.tsv or degree_hist.csv path");
  }
  if (c.mode == Mode::check_kernel && c.params.n < 2) {
    errors.push_back("params.n: check-kernel needs n >= 2");
  }
  if (c.mode == Mode::ensemble && c.replicas < 2) {
    r.warnings.push_back("replicas < 2: no per-k standard errors or z-scores");
  }
  if (errors.empty()) r.config = std::move(c);
  return r;
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw ResourceError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_file(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

json comparison_json(const Comparison& c) {
  json rows = json::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"k", r.k}, {"mean", r.mean}, {"stderr", r.stderr_}, {"p_k", r.p_k}, {"z", r.z}});
  }
  return {{"theory_available", c.theory_available}, {"note", c.note}, {"rows", rows}};
}

json components_json(const Components& c) {
  return {{"count", c.sizes.size()},
          {"largest", c.sizes.empty() ? 0 : c.sizes.front()},
          {"connected", c.connected()}};
}

json structure_json(std::int64_t n, std::span<const Edge> edges, const std::string& method,
                    std::uint64_t seed) {
  json j;
  j["components"] = components_json(connected_components(n, edges));
  if (method != "none") {
    const UndirectedGraph g(n, edges);
    j["diameter"] = diameter(g, parse_diameter_method(method), 16, seed);
  }
  return j;
}

json tail_json(const DegreeHistogram& h, const ExperimentConfig& c, std::uint64_t seed) {
  if (h.max_degree() < c.k_min) {
    return {{"k_min", c.k_min}, {"sufficient", false}, {"note", "no degrees at or above k_min"}};
  }
  return tail_exponent_fit(h, c.k_min, c.bootstrap, seed);
}

json theory_summary(const Model& model) {
  const auto& p = model.params;
  return {{"tail_exponent", powerlaw_exponent(p.m, p.alpha, p.delta)},
          {"degree_growth_a", degree_growth_exponent(p.m, p.alpha, p.delta)},
          {"expected_t_slope", expected_total_attraction(model, 1)},
          {"i_n", model.i_n}};
}

void add_histogram(DegreeHistogram& into, const DegreeHistogram& h) {
  into.sigma += h.sigma;
  if (into.counts.size() < h.counts.size()) into.counts.resize(h.counts.size(), 0);
  for (std::size_t k = 0; k < h.counts.size(); ++k) into.counts[k] += h.counts[k];
}

std::string conservation_violation(const GraphState& s, const DegreeHistogram& h) {
  if (auto v = s.violation()) return *v;
  if (h.total() != s.sigma()) return "histogram total differs from the vertex count";
  if (h.degree_sum() != 2 * static_cast<std::int64_t>(s.m()) * s.sigma()) {
    return "histogram degree sum differs from 2 m sigma";
  }
  return {};
}

json manifest(const ExperimentConfig& c) {
  json seeds = json::array();
  const std::int64_t n = c.mode == Mode::theory || c.mode == Mode::check_kernel ||
                                 c.mode == Mode::analyze
                             ? 0
                             : c.replicas;
  for (std::int64_t r = 0; r < n; ++r) {
    seeds.push_back(Rng::for_replica(c.params.seed, static_cast<std::uint64_t>(r)).key());
  }
  return {{"config", c}, {"version", kVersion}, {"replica_stream_keys", seeds}};
}

int run_growth(const ExperimentConfig& c, const Model& model, std::ostream& log) {
  struct Replica {
    DegreeHistogram hist;
    std::vector<DegreeHistogram> snapshots;
    json report;
    std::string violation;
  };
  std::vector<Replica> out(c.replicas);
  const bool edges = c.edges_enabled();
  const bool per_replica_files = c.replicas > 1;
  std::mutex log_mutex;

  for_each_replica(c.replicas, c.threads, [&](std::int64_t r) {
    RunOptions opt;
    opt.sampler = c.sampler;
    opt.snapshot_times = c.snapshot_times;
    opt.replica = static_cast<std::uint64_t>(r);
    RunResult res = run(model, opt);
    Replica& rep = out[r];
    rep.hist = degree_histogram(res.state);
    rep.violation = conservation_violation(res.state, rep.hist);
    for (auto& s : res.snapshots) rep.snapshots.push_back(std::move(s.histogram));
    rep.report = structure_json(res.state.sigma(), res.state.edges(), c.diameter_method,
                                mix64(static_cast<std::uint64_t>(r)));
    rep.report["replica"] = r;
    rep.report["self_loops"] = res.state.self_loop_count();
    rep.report["conservation"] = rep.violation.empty() ? "ok" : rep.violation;
    rep.report["tail_fit"] = tail_json(rep.hist, c, c.params.seed ^ static_cast<std::uint64_t>(r));
    const std::string suffix = per_replica_files ? "_r" + std::to_string(r) : "";
    if (edges) {
      write_file(c.outputs / ("edges" + suffix + ".tsv"),
                 [&](std::ostream& o) { write_edges_tsv(res.state, o); });
      write_file(c.outputs / ("positions" + suffix + ".csv"),
                 [&](std::ostream& o) { write_positions_csv(res.state, o); });
    }
    if (per_replica_files) {
      write_file(c.outputs / ("degree_hist" + suffix + ".csv"),
                 [&](std::ostream& o) { write_histogram_csv(rep.hist, o); });
    }
    std::lock_guard lock(log_mutex);
    log << "replica " << r << " done\n";
  });

  DegreeHistogram pooled;
  std::vector<DegreeHistogram> hists;
  json replicas = json::array();
  int status = kExitOk;
  for (auto& rep : out) {
    add_histogram(pooled, rep.hist);
    hists.push_back(rep.hist);
    replicas.push_back(std::move(rep.report));
    if (!rep.violation.empty()) {
      log << "invariant violation: " << rep.violation << '\n';
      status = kExitInvariant;
    }
  }
  write_file(c.outputs / "degree_hist.csv", [&](std::ostream& o) { write_histogram_csv(pooled, o); });

  json report;
  report["mode"] = to_string(c.mode);
  report["replicas"] = replicas;
  report["pooled_tail_fit"] = tail_json(pooled, c, c.params.seed);

  std::optional<DegreeTable> table;
  if (c.params.alpha > 2.0) {
    table = limit_degree_distribution(c.params.m, c.params.alpha, c.params.delta,
                                      std::max<std::int64_t>(c.k_max, 10'000));
    report["theory"] = theory_summary(model);
    DegreeTable head = *table;
    head.p.resize(c.k_max + 1);
    write_file(c.outputs / "theory.csv", [&](std::ostream& o) { write_theory_csv(head, o); });
  }
  if (hists.size() >= 2) {
    report["comparison"] = comparison_json(
        compare_empirical_theory(hists, table ? &*table : nullptr, 1, -1));
  }
  json snaps = json::array();
  for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
    DegreeHistogram sp;
    std::vector<DegreeHistogram> at;
    for (const auto& rep : out) {
      add_histogram(sp, rep.snapshots.at(i));
      at.push_back(rep.snapshots.at(i));
    }
    const std::string name = "degree_hist_s" + std::to_string(c.snapshot_times[i]) + ".csv";
    write_file(c.outputs / name, [&](std::ostream& o) { write_histogram_csv(sp, o); });
    json s = {{"sigma", c.snapshot_times[i]}, {"histogram", name}};
    if (at.size() >= 2) {
      s["comparison"] = comparison_json(compare_empirical_theory(at, table ? &*table : nullptr));
    }
    snaps.push_back(std::move(s));
  }
  if (!snaps.empty()) report["snapshots"] = snaps;
  report["status"] = status == kExitOk ? "ok" : "invariant violation";
  write_json(c.outputs / "report.json", report);
  return status;
}

int run_theory(const ExperimentConfig& c, const Model& model, std::ostream& log) {
  json report = {{"mode", "theory"}};
  if (!(c.params.alpha > 2.0)) {
    report["note"] = "alpha <= 2: the limiting degree law is not available";
    log << report["note"].get<std::string>() << '\n';
    write_json(c.outputs / "report.json", report);
    return kExitOk;
  }
  const TheoryPrediction pred = predict(model, std::max<std::int64_t>(c.k_max, 10'000));
  DegreeTable head = pred.table;
  head.p.resize(c.k_max + 1);
  write_file(c.outputs / "theory.csv", [&](std::ostream& o) { write_theory_csv(head, o); });
  report["theory"] = theory_summary(model);
  const auto k2 = c.k_max;
  const auto k1 = std::max<std::int64_t>(2 * c.params.m, k2 / 2);
  if (k2 > k1 && pred.table.at(k1) > 0.0 && pred.table.at(k2) > 0.0) {
    report["tail_slope_estimate"] =
        std::log(pred.table.at(k2) / pred.table.at(k1)) /
        std::log(static_cast<double>(k2) / static_cast<double>(k1));
  }
  report["selfloop_pmf"] = pred.selfloop_pmf;
  report["mass_beyond_table"] = pred.table.deficit;
  write_json(c.outputs / "report.json", report);
  return kExitOk;
}

int run_analyze(const ExperimentConfig& c, std::ostream& log) {
  const std::filesystem::path in_path = c.input;
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + in_path.string());
  json report = {{"mode", "analyze"}, {"input", in_path.string()}};
  DegreeHistogram hist;
  int status = kExitOk;
  if (in_path.extension() == ".tsv") {
    const GraphState s = read_edges_tsv(in, 0, c.params.delta);
    hist = degree_histogram(s);
    const std::string v = conservation_violation(s, hist);
    report["m"] = s.m();
    report["sigma"] = s.sigma();
    report["self_loops"] = s.self_loop_count();
    report["conservation"] = v.empty() ? "ok" : v;
    report["structure"] = structure_json(s.sigma(), s.edges(), c.diameter_method, c.params.seed);
    if (!v.empty()) {
      log << "invariant violation: " << v << '\n';
      status = kExitInvariant;
    }
  } else {
    hist = read_histogram_csv(in);
    report["sigma"] = hist.sigma;
  }
  write_file(c.outputs / "degree_hist.csv", [&](std::ostream& o) { write_histogram_csv(hist, o); });
  report["tail_fit"] = tail_json(hist, c, c.params.seed);
  write_json(c.outputs / "report.json", report);
  return status;
}

int run_couple(const ExperimentConfig& c, const Model& model, std::ostream& log) {
  std::vector<CoupledRun> runs(c.replicas);
  for_each_replica(c.replicas, c.threads, [&](std::int64_t r) {
    runs[r] = run_coupled(model, c.tau, static_cast<std::uint64_t>(r));
    write_file(c.outputs / ("coupling_r" + std::to_string(r) + ".csv"),
               [&](std::ostream& o) { write_trajectory_csv(runs[r], o); });
  });
  const auto mean = mean_trajectory(runs);
  int status = kExitOk;
  std::string violation;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (i > 0 && mean[i] < mean[i - 1]) violation = "mean mismatch count decreased";
    if (mean[i] > static_cast<double>(c.params.m) * static_cast<double>(i + 1)) {
      violation = "mean mismatch count exceeds m (sigma - tau + 1)";
    }
  }
  if (!violation.empty()) {
    log << "invariant violation: " << violation << '\n';
    status = kExitInvariant;
  }
  json samples = json::array();
  for (std::int64_t s = c.tau, step = 1; s <= c.params.n; s += step) {
    samples.push_back({{"sigma", s}, {"mean_delta", mean[s - c.tau]}});
    if (s - c.tau >= 10 * step) step *= 2;
  }
  json summary = {{"tau", c.tau},
                  {"replicas", c.replicas},
                  {"fit", mismatch_growth_fit(runs, model)},
                  {"mean_delta", samples},
                  {"status", violation.empty() ? "ok" : violation}};
  write_json(c.outputs / "coupling_summary.json", summary);
  write_json(c.outputs / "report.json", summary);
  return status;
}

int run_check_kernel(const ExperimentConfig& c) {
  const KernelReport kr =
      kernel_report(c.params.kernel, static_cast<double>(c.params.n), c.mu, c.L);
  json j = kr;
  j["kernel"] = c.params.kernel;
  j["n"] = c.params.n;
  write_json(c.outputs / "kernel_report.json", j);
  write_json(c.outputs / "report.json", j);
  return kExitOk;
}

}  // namespace

int run_experiment(const ExperimentConfig& c, std::ostream& log) {
  try {
    c.params.validate();
    std::filesystem::create_directories(c.outputs);
    write_json(c.outputs / "manifest.json", manifest(c));
    if (c.mode == Mode::analyze) return run_analyze(c, log);
    const Model model(c.params);
    switch (c.mode) {
      case Mode::generate:
      case Mode::ensemble: return run_growth(c, model, log);
      case Mode::theory: return run_theory(c, model, log);
      case Mode::couple: return run_couple(c, model, log);
      case Mode::check_kernel: return run_check_kernel(c);
      case Mode::analyze: break;
    }
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitResource;
  }
  return kExitOk;
}

}  // namespace gpaf
