#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpaf/process.hpp"

namespace gpaf {

enum class Mode { generate, ensemble, theory, analyze, couple, check_kernel };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

struct ExperimentConfig {
  Mode mode = Mode::generate;
  ProcessParams params;
  std::int64_t replicas = 1;
  std::vector<std::int64_t> snapshot_times;
  std::filesystem::path outputs = "out";
  int threads = 0;  // 0: all cores
  SamplerKind sampler = SamplerKind::exact;
  std::optional<bool> write_edges;  // unset: only in generate mode
  std::int64_t k_min = 10;          // tail fit cutoff; 5m unless given
  std::int64_t k_max = 1000;        // last row of theory.csv
  int bootstrap = 0;                // KS bootstrap resamples
  std::int64_t tau = 100;           // coupling: differing vertex
  std::string diameter_method = "ifub";  // exact | ifub | sampled | none
  double mu = 0.25;                 // kernel check: mass fraction
  double L = 1.0;                   // kernel check: S2 threshold
  std::string input;                // analyze: edges.tsv or degree_hist.csv

  bool edges_enabled() const { return write_edges.value_or(mode == Mode::generate); }
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return config.has_value(); }
};

/// Parses a JSON document and checks every model constraint. Each violation
/// becomes one error naming the constraint. Manifests written by
/// run_experiment parse back into the same configuration.
ConfigResult validate_config(const std::string& raw);
ConfigResult validate_config(const nlohmann::json& doc);
inline ConfigResult validate_config(const char* raw) { return validate_config(std::string(raw)); }

/// Exit statuses of run_experiment.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;  // a generated graph broke a conservation law
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResource = 3;   // memory limit, unreadable input, I/O

/// Runs the configured mode and writes its artifacts under config.outputs.
/// Diagnostics go to `log`.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace gpaf
