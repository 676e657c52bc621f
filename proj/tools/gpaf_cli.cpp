#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpaf/experiment.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::int64_t> n, replicas, k_min, k_max, tau;
  std::optional<int> m, threads, bootstrap;
  std::optional<double> alpha, delta, mu, L;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> kernel, sampler, diameter, input;
  std::optional<bool> write_edges;
  std::vector<std::int64_t> snapshots;
};

void add_options(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config, "JSON config file (a manifest.json also works)")
      ->check(CLI::ExistingFile);
  sub->add_option("-o,--out", o.out, "output directory");
  sub->add_option("--n", o.n, "number of vertices");
  sub->add_option("--m", o.m, "edges per new vertex");
  sub->add_option("--alpha", o.alpha, "self-loop bias");
  sub->add_option("--delta", o.delta, "initial attractiveness");
  sub->add_option("--seed", o.seed, "base seed");
  sub->add_option("--kernel", o.kernel, R"(kernel as JSON, e.g. '{"variant":"range_indicator","r_n":0.3}')");
  sub->add_option("--replicas", o.replicas, "number of replicas");
  sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
  sub->add_option("--sampler", o.sampler, "exact or fast");
  sub->add_option("--snapshots", o.snapshots, "vertex counts at which to record histograms");
  sub->add_option("--write-edges", o.write_edges, "write edges.tsv and positions.csv (true/false)");
  sub->add_option("--k-min", o.k_min, "tail fit cutoff");
  sub->add_option("--k-max", o.k_max, "last degree in theory.csv");
  sub->add_option("--bootstrap", o.bootstrap, "bootstrap resamples for the tail fit p-value");
  sub->add_option("--tau", o.tau, "coupling: vertex whose position differs");
  sub->add_option("--diameter", o.diameter, "exact, ifub, sampled or none");
  sub->add_option("--mu", o.mu, "kernel check: mass fraction for the interaction radius");
  sub->add_option("--L", o.L, "kernel check: threshold for n rho^2 / log n");
  sub->add_option("--input", o.input, "analyze: edges.tsv or degree_hist.csv");
}

json load(const Overrides& o, const std::string& mode) {
  json doc = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    std::stringstream buf;
    buf << in.rdbuf();
    doc = json::parse(buf.str());  // parse errors surface as a config error
    if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];
  }
  doc["mode"] = mode;
  if (!doc.contains("params") || !doc["params"].is_object()) doc["params"] = json::object();
  json& p = doc["params"];
  if (o.n) p["n"] = *o.n;
  if (o.m) p["m"] = *o.m;
  if (o.alpha) p["alpha"] = *o.alpha;
  if (o.delta) p["delta"] = *o.delta;
  if (o.seed) p["seed"] = *o.seed;
  if (o.kernel) p["kernel"] = json::parse(*o.kernel);
  if (p.empty()) doc.erase("params");
  if (o.out) doc["outputs"] = *o.out;
  if (o.replicas) doc["replicas"] = *o.replicas;
  if (o.threads) doc["threads"] = *o.threads;
  if (o.sampler) doc["sampler"] = *o.sampler;
  if (!o.snapshots.empty()) doc["snapshot_times"] = o.snapshots;
  if (o.write_edges) doc["write_edges"] = *o.write_edges;
  if (o.k_min) doc["k_min"] = *o.k_min;
  if (o.k_max) doc["k_max"] = *o.k_max;
  if (o.bootstrap) doc["bootstrap"] = *o.bootstrap;
  if (o.tau) doc["tau"] = *o.tau;
  if (o.diameter) doc["diameter_method"] = *o.diameter;
  if (o.mu) doc["mu"] = *o.mu;
  if (o.L) doc["L"] = *o.L;
  if (o.input) doc["input"] = *o.input;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric preferential attachment with fitness: simulator and checks"};
  app.set_version_flag("--version", gpaf::kVersion);
  app.require_subcommand(1);
  Overrides o;
  const std::vector<std::pair<std::string, std::string>> modes = {
      {"generate", "grow graphs and write edges, histograms and structure"},
      {"ensemble", "grow many replicas and compare degrees with theory"},
      {"theory", "write the limiting degree distribution"},
      {"analyze", "fit and measure an existing edges.tsv or degree_hist.csv"},
      {"couple", "run the two-process coupling and fit mismatch growth"},
      {"check-kernel", "report kernel integrals and regularity conditions"}};
  for (const auto& [name, help] : modes) add_options(app.add_subcommand(name, help), o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? gpaf::kExitOk : gpaf::kExitConfig;
  }
  const std::string mode = app.get_subcommands().front()->get_name();

  json doc;
  try {
    doc = load(o, mode);
  } catch (const json::exception& e) {
    std::cerr << "error: config is not valid JSON: " << e.what() << '\n';
    return gpaf::kExitConfig;
  }
  const gpaf::ConfigResult cfg = gpaf::validate_config(doc);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  if (!cfg.ok()) {
    for (const auto& e : cfg.errors) std::cerr << "error: " << e << '\n';
    return gpaf::kExitConfig;
  }
  const int status = gpaf::run_experiment(*cfg.config, std::cerr);
  if (status == gpaf::kExitOk) std::cerr << "wrote " << cfg.config->outputs.string() << '\n';
  return status;
}
