#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpaf/histogram.hpp"
#include "gpaf/kernel.hpp"
#include "gpaf/rng.hpp"
#include "gpaf/sphere.hpp"
#include "gpaf/weighted_index.hpp"

namespace gpaf {

inline constexpr const char* kVersion = "0.1.0";

/// 0-based vertex id; vertex v was added at time v + 1.
using Vertex = std::uint32_t;

struct Edge {
  Vertex source;
  Vertex head;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct ProcessParams {
  std::int64_t n = 1;   // final vertex count
  int m = 1;            // edges per step
  double alpha = 3.0;   // self-loop bias
  double delta = 0.0;   // initial attractiveness, > -m
  FitnessKernel kernel;
  std::uint64_t seed = 0;

  double theta() const noexcept { return (2.0 * m + delta) / 2.0; }

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
  /// Non-fatal notes, e.g. alpha <= 2 has no limiting degree law.
  std::vector<std::string> warnings() const;
};

void to_json(nlohmann::json& j, const ProcessParams& p);
void from_json(const nlohmann::json& j, ProcessParams& p);

/// The directed multigraph G_sigma with positions and degrees.
///
/// Every vertex emits exactly m edges. A self-loop counts twice toward its
/// vertex's degree, so degree(v) = m + #{edges with head v} and the degree
/// sum is 2 m sigma.
class GraphState {
 public:
  GraphState(int m, double delta) : m_(m), delta_(delta) {}

  std::int64_t sigma() const noexcept { return static_cast<std::int64_t>(degree_.size()); }
  int m() const noexcept { return m_; }
  double delta() const noexcept { return delta_; }

  SpherePoint position(Vertex v) const { return {xs_.at(v), ys_.at(v), zs_.at(v)}; }
  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ys() const noexcept { return ys_; }
  std::span<const double> zs() const noexcept { return zs_; }

  std::int64_t degree(Vertex v) const { return degree_.at(v); }
  std::span<const std::int64_t> degrees() const noexcept { return degree_; }
  /// d(v) + delta, kept alongside the degree for the samplers.
  std::span<const double> attachment_weights() const noexcept { return weight_; }

  std::span<const Edge> edges() const noexcept { return edges_; }
  /// The m edges emitted by vertex v.
  std::span<const Edge> out_edges(Vertex v) const {
    return std::span<const Edge>(edges_).subspan(static_cast<std::size_t>(v) * m_, m_);
  }

  /// Appends a vertex at `position` whose m edges point to `heads`; a head
  /// equal to the new vertex's id is a self-loop.
  void add_vertex(const SpherePoint& position, std::span<const Vertex> heads);

  void reserve(std::int64_t n);

  /// Conservation checks (out-degree m, degree identity, degree sum, unit
  /// positions). Returns a description of the first violation found.
  std::optional<std::string> violation() const;

  std::int64_t self_loop_count() const;

  friend bool operator==(const GraphState&, const GraphState&) = default;

 private:
  int m_;
  double delta_;
  std::vector<double> xs_, ys_, zs_;
  std::vector<std::int64_t> degree_;
  std::vector<double> weight_;
  std::vector<Edge> edges_;
};

DegreeHistogram degree_histogram(const GraphState& state);

/// Parameters plus the derived constants every step needs.
struct Model {
  explicit Model(ProcessParams p);
  ProcessParams params;
  double i_n;        // attractiveness integral of the kernel
  double theta;      // (2m + delta)/2
  double floor_coef; // alpha * Theta * I_n; the normalizer is max(T, floor_coef * sigma)
};

/// T(u) = sum_v (d(v) + delta) F(|x_v - u|); 0 for the empty graph.
double total_attraction(const GraphState& state, const SpherePoint& u,
                        const FitnessKernel& kernel, double delta);

/// M = max(T, alpha Theta I_n sigma); 0 when sigma = 0.
double normalizer(double t, std::int64_t sigma, double alpha, double theta, double i_n);

/// Law of one endpoint of the next vertex: entry v < sigma is
/// (d(v) + delta) F(|x_v - u|) / M, entry sigma is the self-loop mass 1 - T/M.
std::vector<double> attachment_distribution(const GraphState& state, const SpherePoint& u,
                                            const Model& model);

struct StepInfo {
  SpherePoint position;
  double t = 0.0;  // T at the new position
  double m = 0.0;  // normalizer
  int self_loops = 0;
  bool fallback = false;  // fast sampler fell back to the exact scan
};

/// Block sums of the attachment weights against a position, and exact
/// inverse-CDF sampling over them. O(sigma) per step.
class ExactSampler {
 public:
  /// Computes the weights for position u; returns T.
  double prepare(const GraphState& state, const SpherePoint& u, const FitnessKernel& kernel);
  /// One endpoint given the prepared T and M (M >= T); returns sigma for a self-loop.
  Vertex sample(const GraphState& state, const SpherePoint& u, const FitnessKernel& kernel,
                double m, Rng& rng) const;
  double total() const noexcept { return total_; }

  static constexpr std::size_t kBlock = 64;

 private:
  std::vector<double> blocks_;
  double total_ = 0.0;
};

/// Proposal-rejection sampler: propose v with probability proportional to
/// d(v) + delta from a Fenwick tree, accept with F(|x_v - u|)/F_max.
///
/// The self-loop decision still needs T: it is maintained exactly for the
/// constant kernel and scanned otherwise. When I_n / F_max falls below the
/// acceptance floor the sampler uses the exact scan instead.
class FastSampler {
 public:
  FastSampler(const Model& model, double acceptance_floor = 0.01);

  /// Rebuilds the proposal index from a state.
  void attach(const GraphState& state);
  /// Mirrors GraphState::add_vertex.
  void record_vertex(Vertex v, double base_weight, std::span<const Vertex> heads);

  /// Computes T and M for position u.
  void prepare(const GraphState& state, const SpherePoint& u);
  Vertex sample(const GraphState& state, const SpherePoint& u, Rng& rng);

  /// Convenience: prepare + one draw.
  Vertex sample_endpoint(const GraphState& state, const SpherePoint& u, Rng& rng) {
    prepare(state, u);
    return sample(state, u, rng);
  }

  /// The exact law the rejection scheme induces (proposal x acceptance,
  /// renormalized, mixed with the self-loop mass), read from the index.
  std::vector<double> law(const GraphState& state, const SpherePoint& u) const;

  bool uses_fallback() const noexcept { return fallback_; }
  double expected_acceptance() const noexcept { return expected_acceptance_; }
  double t() const noexcept { return t_; }
  double normalizer_value() const noexcept { return m_; }
  const WeightedIndex& index() const noexcept { return index_; }

 private:
  const Model* model_;
  WeightedIndex index_;
  ExactSampler exact_;
  double expected_acceptance_;
  bool fallback_;
  double t_ = 0.0;
  double m_ = 0.0;
};

/// Applies the growth rule once with the exact sampler.
StepInfo grow_one_step(GraphState& state, const Model& model, Rng& rng);

enum class SamplerKind { exact, fast };

/// A single GPAF run, driven one step at a time.
class Process {
 public:
  Process(const Model& model, Rng rng, SamplerKind sampler = SamplerKind::exact,
          double acceptance_floor = 0.01);

  const GraphState& state() const noexcept { return state_; }
  const Model& model() const noexcept { return *model_; }
  Rng& rng() noexcept { return rng_; }

  /// Adds vertex sigma + 1 at a uniform position.
  StepInfo step();
  /// Adds vertex sigma + 1 at a caller-chosen position.
  StepInfo step_at(const SpherePoint& u);

 private:
  const Model* model_;
  Rng rng_;
  SamplerKind kind_;
  GraphState state_;
  ExactSampler exact_;
  std::optional<FastSampler> fast_;
  std::vector<Vertex> heads_;
};

struct Snapshot {
  std::int64_t sigma;
  DegreeHistogram histogram;
  std::vector<double> t_samples;  // T(U) at independent uniform U
};

struct RunOptions {
  SamplerKind sampler = SamplerKind::exact;
  std::vector<std::int64_t> snapshot_times;  // ascending, within [1, n]
  int t_samples = 0;
  double acceptance_floor = 0.01;
  std::uint64_t replica = 0;
  /// Refuse runs whose edge list would exceed this many bytes.
  std::size_t memory_limit_bytes = std::size_t{8} << 30;
};

struct RunResult {
  GraphState state;
  std::vector<Snapshot> snapshots;
};

/// Grows G_0 .. G_n; a deterministic function of (params, options).
RunResult run(const ProcessParams& params, const RunOptions& options = {});
RunResult run(const Model& model, const RunOptions& options = {});

/// Header "src<TAB>head", then one edge per line: 1-based ids, creation order.
void write_edges_tsv(const GraphState& state, std::ostream& out);
/// Reads the format above; positions are left at the north pole.
GraphState read_edges_tsv(std::istream& in, int m, double delta);
/// "vertex,x,y,z" with header.
void write_positions_csv(const GraphState& state, std::ostream& out);

nlohmann::json run_manifest(const ProcessParams& params);

}  // namespace gpaf
