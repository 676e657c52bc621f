#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpaf/histogram.hpp"
#include "gpaf/process.hpp"
#include "gpaf/rng.hpp"
#include "gpaf/theory.hpp"

namespace gpaf {

// ---------------------------------------------------------------------------
// Tail exponent

struct TailFit {
  std::int64_t k_min = 0;
  double n_tail = 0.0;      // observations (or mass) with k >= k_min
  bool sufficient = false;  // at least 50 observations in the tail
  double mle = 0.0;         // discrete maximum-likelihood exponent
  double mle_stderr = 0.0;
  double ls = 0.0;          // 1 - slope of log CCDF vs log k
  double ls_stderr = 0.0;
  double ks_statistic = 0.0;
  double gof_pvalue = -1.0; // bootstrap KS p-value; -1 when not computed
};

/// Fits P(K = k) proportional to k^-gamma on k >= k_min to the frequencies
/// weight[k] (integer counts or exact probabilities). No bootstrap.
TailFit fit_power_law_tail(std::span<const double> weight, std::int64_t k_min);

/// Power-law fit of a degree histogram's tail. With bootstrap > 0 the
/// goodness of fit is assessed by parametric bootstrap of the KS distance.
TailFit tail_exponent_fit(const DegreeHistogram& hist, std::int64_t k_min, int bootstrap = 0,
                          std::uint64_t seed = 0x5eed);

/// Exact draw from P(K = k) proportional to k^-gamma, k >= k_min (rejection
/// from a floored continuous Pareto envelope).
std::int64_t sample_discrete_power_law(double gamma, std::int64_t k_min, Rng& rng);

// ---------------------------------------------------------------------------
// Structure

/// Undirected simple graph in CSR form: self-loops dropped, multi-edges merged.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  UndirectedGraph(std::int64_t n, std::span<const Edge> edges);
  static UndirectedGraph from_state(const GraphState& state) {
    return UndirectedGraph(state.sigma(), state.edges());
  }

  std::int64_t size() const noexcept { return static_cast<std::int64_t>(offsets_.size()) - 1; }
  std::span<const Vertex> neighbors(Vertex v) const {
    return std::span<const Vertex>(adj_).subspan(offsets_[v], offsets_[v + 1] - offsets_[v]);
  }
  std::int64_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

  /// Induced subgraph on `vertices`, relabeled 0..k-1 in the given order.
  UndirectedGraph induced(std::span<const Vertex> vertices) const;

 private:
  std::vector<std::int64_t> offsets_{0};
  std::vector<Vertex> adj_;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t x);
  bool unite(std::size_t a, std::size_t b);
  std::size_t component_size(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct Components {
  std::vector<std::int64_t> sizes;  // descending
  std::vector<Vertex> largest;      // members of the largest component, ascending
  bool connected() const { return sizes.size() <= 1; }
};

/// Connectivity of the undirected edge set; self-loops never join anything.
Components connected_components(std::int64_t n, std::span<const Edge> edges);
inline Components connected_components(const GraphState& s) {
  return connected_components(s.sigma(), s.edges());
}

enum class DiameterMethod { exact, ifub, sampled };

struct DiameterResult {
  std::int64_t value = 0;
  DiameterMethod method = DiameterMethod::exact;
  bool lower_bound = false;      // sampled double sweeps
  bool largest_component = false;// input was disconnected
  std::int64_t component_size = 0;
  std::int64_t bfs_runs = 0;
};

inline constexpr std::int64_t kExactDiameterLimit = 20000;

/// Diameter of the (largest component of the) undirected graph.
/// exact: BFS from every vertex, only for components up to 2e4 vertices.
/// ifub: exact via iterative fringe upper bounds. sampled: best of
/// `samples` random double sweeps, a lower bound.
DiameterResult diameter(const UndirectedGraph& g, DiameterMethod method, int samples = 16,
                        std::uint64_t seed = 0xd1a);

DiameterMethod parse_diameter_method(const std::string& s);
std::string to_string(DiameterMethod m);

// ---------------------------------------------------------------------------
// Empirical vs theory

struct ComparisonRow {
  std::int64_t k;
  double mean;    // ensemble mean of N_k / sigma
  double stderr_; // standard error of that mean
  double p_k;
  double z;
};

struct Comparison {
  bool theory_available = false;
  std::string note;
  std::vector<ComparisonRow> rows;
};

/// Per-k ensemble mean of N_k/sigma against p_k. Needs >= 2 histograms.
/// Without a table (alpha <= 2) the report only carries empirical columns.
Comparison compare_empirical_theory(std::span<const DegreeHistogram> ensemble,
                                    const DegreeTable* table, std::int64_t k_lo = 1,
                                    std::int64_t k_hi = -1);

/// Fraction of samples with |value - expected| > band.
double exceedance_fraction(std::span<const double> values, double expected, double band);

void write_histogram_csv(const DegreeHistogram& h, std::ostream& out);
DegreeHistogram read_histogram_csv(std::istream& in);
void write_comparison_csv(const Comparison& c, std::ostream& out);

void to_json(nlohmann::json& j, const TailFit& f);
void to_json(nlohmann::json& j, const DiameterResult& d);

}  // namespace gpaf
