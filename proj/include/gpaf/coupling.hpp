#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpaf/process.hpp"
#include "gpaf/rng.hpp"

namespace gpaf {

enum class BallColor { white, red, purple, orange, green, blue };

std::string to_string(BallColor c);

/// A weighted, numbered ball. `number` is a 0-based vertex id; the
/// newcomer's balls (green, blue) carry its id sigma.
struct Ball {
  BallColor color;
  std::int64_t number;
  double weight;
};

enum class UrnPart { common, only_u, only_hat };

struct BallRef {
  UrnPart part;
  std::size_t index;
  friend bool operator==(const BallRef&, const BallRef&) = default;
};

/// The urns U and U-hat of two perturbed processes, split into the common
/// balls C, the balls R only in U, and the balls L only in U-hat.
///
/// The labeling always satisfies ||U|| <= ||U-hat||.
struct UrnPair {
  std::vector<Ball> common;    // C: white, red, green
  std::vector<Ball> only_u;    // R: white, purple, blue
  std::vector<Ball> only_hat;  // L: white, orange
  bool swapped = false;        // inputs were relabeled so that T <= T-hat
  double t = 0.0;              // T of the U-labeled process
  double t_hat = 0.0;

  /// Validates colors per part, non-negative weights and ||U|| <= ||U-hat||.
  static UrnPair from_parts(std::vector<Ball> common, std::vector<Ball> only_u,
                            std::vector<Ball> only_hat);

  double common_norm() const;
  double only_u_norm() const;
  double only_hat_norm() const;
  double u_norm() const { return common_norm() + only_u_norm(); }
  double hat_norm() const { return common_norm() + only_hat_norm(); }

  /// Per-draw mismatch probability ||L|| / ||U-hat||.
  double mismatch_probability() const;

  const Ball& ball(const BallRef& r) const;
};

/// Builds the urns for G_sigma and G-hat_sigma (perturbed at time tau, 1-based)
/// and the shared next position. Throws std::invalid_argument when the two
/// states do not share their history before tau and their positions after it.
UrnPair build_urns(const GraphState& state, const GraphState& state_hat,
                   const SpherePoint& x_next, std::int64_t tau, const Model& model);

struct JointDraw {
  BallRef ball;
  BallRef ball_hat;
  /// The pair are different balls (the draw did not keep the common ball).
  bool mismatch() const { return !(ball == ball_hat); }
};

/// Draws b from U by weight; if b is common it is kept for U-hat with
/// probability ||U||/||U-hat||, otherwise b-hat is drawn from L by weight.
JointDraw joint_draw(const UrnPair& pair, Rng& rng);

struct JointOutcome {
  BallRef ball;
  BallRef ball_hat;
  double probability;
};

/// The exact law of joint_draw, one entry per reachable pair of balls.
std::vector<JointOutcome> joint_law(const UrnPair& pair);

/// Two processes sharing G_{tau-1}, each applying the growth rule
/// independently at time tau, then coupled through the urns at every later
/// step with a shared new position.
///
/// Urns are represented per vertex rather than per ball: C holds
/// (min(d, d-hat) + delta) A(x_v) for every v != tau, and R/L hold the
/// degree surplus of each side, which is nonzero only on a sparse set.
class CoupledProcess {
 public:
  CoupledProcess(const Model& model, std::int64_t tau, Rng rng);
  /// Starts from two given states (already perturbed at tau).
  CoupledProcess(const Model& model, std::int64_t tau, GraphState a, GraphState b, Rng rng);

  const GraphState& first() const noexcept { return a_; }
  const GraphState& second() const noexcept { return b_; }
  std::int64_t tau() const noexcept { return tau_; }
  std::int64_t sigma() const noexcept { return a_.sigma(); }
  std::int64_t mismatches() const noexcept { return delta_; }

  struct Prepared {
    bool swapped;        // the second process plays U
    double t_u, t_hat;
    double u_norm, hat_norm;
    double common, only_u, only_hat;
    double mismatch_probability;
  };

  /// Builds the aggregated urns for the next position x.
  const Prepared& prepare(const SpherePoint& x);

  struct Pair {
    Vertex head_first;   // endpoint for the first process
    Vertex head_second;
    bool mismatch;
  };
  /// One joint draw from the prepared urns.
  Pair draw(Rng& rng) const;

  /// Adds vertex sigma + 1 to both processes; returns the step's mismatches.
  int step();

 private:
  void rebuild_diff();
  void note_heads(std::span<const Vertex> heads_a, std::span<const Vertex> heads_b);

  const Model* model_;
  std::int64_t tau_;
  Vertex tv_;  // 0-based id of vertex tau
  Rng rng_;
  GraphState a_, b_;
  std::int64_t delta_ = 0;

  // Prepared urns.
  Prepared prep_{};
  SpherePoint x_{};
  std::vector<double> blocks_;
  double common_vertices_ = 0.0;  // C mass excluding the green ball
  double green_ = 0.0, blue_ = 0.0, purple_ = 0.0, orange_ = 0.0;
  double a_tau_u_ = 0.0, a_tau_hat_ = 0.0;
  std::vector<Vertex> diff_;       // vertices != tau whose degrees differ
  std::vector<char> in_diff_;
  std::vector<Vertex> heads_a_, heads_b_;
};

struct CoupledRun {
  std::int64_t tau = 1;
  std::vector<std::int64_t> trajectory;  // Delta after vertex sigma is added, sigma = tau..n
  std::optional<GraphState> first, second;

  std::int64_t delta_at(std::int64_t sigma) const { return trajectory.at(sigma - tau); }
};

CoupledRun run_coupled(const Model& model, std::int64_t tau, std::uint64_t replica = 0,
                       bool keep_states = false);

struct MismatchFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95%
  double theory_a = 0.0;               // m / (alpha Theta)
  std::int64_t sigma_low = 0, sigma_high = 0;
  int points = 0;
  bool sufficient = false;
  std::string note;
};

/// Regresses log(mean Delta_sigma) - log log sigma on log(sigma/tau) over
/// sigma in [window_start, n] (default 10 tau). Flags fewer than 20 replicas
/// or a window shorter than one decade.
MismatchFit mismatch_growth_fit(std::span<const CoupledRun> ensemble, const Model& model,
                                std::int64_t window_start = -1);

/// Ensemble mean of Delta_sigma for sigma = tau..n.
std::vector<double> mean_trajectory(std::span<const CoupledRun> ensemble);

void write_trajectory_csv(const CoupledRun& run, std::ostream& out);
void to_json(nlohmann::json& j, const MismatchFit& f);

}  // namespace gpaf
