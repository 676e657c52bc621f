#include "gpaf/graphstats.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "gpaf/special.hpp"

namespace gpaf {
namespace {

constexpr double kGammaLo = 1.0 + 1e-6;
constexpr double kGammaHi = 30.0;

double log_zeta(double s, double q) { return std::log(hurwitz_zeta(s, q)); }

struct TailData {
  double count = 0.0;   // W
  double log_sum = 0.0; // sum w_k ln k
};

TailData tail_data(std::span<const double> w, std::int64_t k_min) {
  TailData d;
  for (std::size_t k = static_cast<std::size_t>(std::max<std::int64_t>(k_min, 1)); k < w.size(); ++k) {
    if (w[k] > 0.0) {
      d.count += w[k];
      d.log_sum += w[k] * std::log(static_cast<double>(k));
    }
  }
  return d;
}

// Per-observation log-likelihood; concave in gamma.
double mean_loglik(double gamma, double mean_log, double k_min) {
  return -gamma * mean_log - log_zeta(gamma, k_min);
}

double mle_exponent(double mean_log, double k_min) {
  // Golden-section search on the concave log-likelihood.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = kGammaLo, b = kGammaHi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = mean_loglik(c, mean_log, k_min), fd = mean_loglik(d, mean_log, k_min);
  for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = mean_loglik(c, mean_log, k_min);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = mean_loglik(d, mean_log, k_min);
    }
  }
  return 0.5 * (a + b);
}

// Variance of ln K under the fitted law: the second derivative of log zeta.
double fisher_information(double gamma, double k_min) {
  const double h = 1e-4 * std::max(1.0, gamma);
  const double lo = std::max(kGammaLo, gamma - h);
  const double hi = lo + 2.0 * h;
  const double mid = lo + h;
  return (log_zeta(hi, k_min) - 2.0 * log_zeta(mid, k_min) + log_zeta(lo, k_min)) / (h * h);
}

// Kolmogorov-Smirnov distance between empirical and fitted tail CCDFs.
double ks_distance(std::span<const double> w, std::int64_t k_min, double gamma, double total) {
  const double z0 = hurwitz_zeta(gamma, static_cast<double>(k_min));
  double emp_tail = total;  // mass at k' >= k
  double model_tail = z0;   // zeta(gamma, k) tracks sum_{k' >= k} k'^-gamma
  double d = 0.0;
  for (std::size_t k = static_cast<std::size_t>(k_min); k < w.size(); ++k) {
    d = std::max(d, std::abs(emp_tail / total - model_tail / z0));
    emp_tail -= w[k];
    model_tail -= std::pow(static_cast<double>(k), -gamma);
  }
  // Past the largest observed degree the empirical tail is empty.
  const auto k_end = std::max<std::size_t>(w.size(), static_cast<std::size_t>(k_min));
  return std::max(d, hurwitz_zeta(gamma, static_cast<double>(k_end)) / z0);
}

struct LineFit {
  double slope = 0.0, slope_stderr = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  LineFit out;
  if (x.size() < 3) return out;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  out.slope = sxy / sxx;
  const double icpt = my - out.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - icpt - out.slope * x[i];
    sse += r * r;
  }
  out.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
  return out;
}

}  // namespace

TailFit fit_power_law_tail(std::span<const double> weight, std::int64_t k_min) {
  if (k_min < 1) throw std::invalid_argument("tail fit: k_min must be >= 1");
  TailFit f;
  f.k_min = k_min;
  const TailData d = tail_data(weight, k_min);
  f.n_tail = d.count;
  f.sufficient = d.count >= 50.0;
  if (!(d.count > 0.0)) return f;
  const double kmin = static_cast<double>(k_min);
  f.mle = mle_exponent(d.log_sum / d.count, kmin);
  f.mle_stderr = 1.0 / std::sqrt(d.count * fisher_information(f.mle, kmin));

  // CCDF from suffix sums, on log-spaced k, leaving out the thin end where
  // less than 1e-3 of the tail mass remains.
  const auto lo = static_cast<std::size_t>(k_min);
  std::vector<double> suffix(weight.size() + 1, 0.0);
  for (std::size_t k = weight.size(); k-- > lo;) suffix[k] = suffix[k + 1] + weight[k];
  std::vector<double> lx, ly;
  double next = kmin;
  for (std::size_t k = lo; k < weight.size(); ++k) {
    const auto kd = static_cast<double>(k);
    if (weight[k] <= 0.0 || kd < next) continue;
    if (suffix[k] < 1e-3 * d.count) break;
    lx.push_back(std::log(kd));
    ly.push_back(std::log(suffix[k] / d.count));
    next = kd * 1.05;
  }
  const LineFit lf = least_squares(lx, ly);
  f.ls = 1.0 - lf.slope;
  f.ls_stderr = lf.slope_stderr;
  f.ks_statistic = ks_distance(weight, k_min, f.mle, d.count);
  return f;
}

std::int64_t sample_discrete_power_law(double gamma, std::int64_t k_min, Rng& rng) {
  if (!(gamma > 1.0) || k_min < 1) {
    throw std::invalid_argument("sample_discrete_power_law: requires gamma > 1, k_min >= 1");
  }
  // Envelope: floor of a continuous Pareto on [k_min, inf). The ratio of
  // target to envelope mass, r(k) = k^-g (g-1) / (k^{1-g} - (k+1)^{1-g}),
  // decreases in k, so r(k)/r(k_min) is a valid acceptance probability.
  auto ratio = [gamma](double k) {
    const double cell = std::pow(k, 1.0 - gamma) * -std::expm1((1.0 - gamma) * std::log1p(1.0 / k));
    return std::pow(k, -gamma) * (gamma - 1.0) / cell;
  };
  const double kmin = static_cast<double>(k_min);
  const double r0 = ratio(kmin);
  for (;;) {
    const double x = kmin * std::pow(1.0 - rng.uniform(), -1.0 / (gamma - 1.0));
    if (!(x < 9.0e18)) continue;
    const double k = std::floor(x);
    if (rng.uniform() * r0 <= ratio(k)) return static_cast<std::int64_t>(k);
  }
}

TailFit tail_exponent_fit(const DegreeHistogram& hist, std::int64_t k_min, int bootstrap,
                          std::uint64_t seed) {
  std::vector<double> w(hist.counts.begin(), hist.counts.end());
  TailFit f = fit_power_law_tail(w, k_min);
  if (bootstrap <= 0 || !(f.n_tail > 0.0)) return f;
  const auto n_tail = static_cast<std::int64_t>(std::llround(f.n_tail));
  Rng rng(seed);
  int exceed = 0;
  for (int b = 0; b < bootstrap; ++b) {
    std::vector<double> synth;
    for (std::int64_t i = 0; i < n_tail; ++i) {
      const auto k = sample_discrete_power_law(f.mle, k_min, rng);
      if (k >= static_cast<std::int64_t>(synth.size())) {
        if (k > 100'000'000) continue;  // beyond any observable degree
        synth.resize(k + 1, 0.0);
      }
      synth[k] += 1.0;
    }
    const TailFit g = fit_power_law_tail(synth, k_min);
    if (g.ks_statistic >= f.ks_statistic) ++exceed;
  }
  f.gof_pvalue = static_cast<double>(exceed) / bootstrap;
  return f;
}

// ---------------------------------------------------------------------------
// Structure

UndirectedGraph::UndirectedGraph(std::int64_t n, std::span<const Edge> edges) {
  std::vector<std::int64_t> deg(n + 1, 0);
  for (const Edge& e : edges) {
    if (e.source == e.head) continue;
    if (e.source >= n || e.head >= n) throw std::out_of_range("UndirectedGraph: vertex id >= n");
    ++deg[e.source];
    ++deg[e.head];
  }
  offsets_.assign(n + 1, 0);
  for (std::int64_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
  adj_.resize(offsets_[n]);
  std::vector<std::int64_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges) {
    if (e.source == e.head) continue;
    adj_[fill[e.source]++] = e.head;
    adj_[fill[e.head]++] = e.source;
  }
  // Sort and dedupe each list, then compact.
  std::int64_t out = 0;
  std::vector<std::int64_t> new_offsets(n + 1, 0);
  for (std::int64_t v = 0; v < n; ++v) {
    auto first = adj_.begin() + offsets_[v];
    auto last = adj_.begin() + offsets_[v + 1];
    std::sort(first, last);
    last = std::unique(first, last);
    for (auto it = first; it != last; ++it) adj_[out++] = *it;
    new_offsets[v + 1] = out;
  }
  adj_.resize(out);
  offsets_ = std::move(new_offsets);
}

UndirectedGraph UndirectedGraph::induced(std::span<const Vertex> vertices) const {
  std::vector<std::int64_t> label(size(), -1);
  for (std::size_t i = 0; i < vertices.size(); ++i) label[vertices[i]] = static_cast<std::int64_t>(i);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (Vertex w : neighbors(vertices[i])) {
      if (label[w] > static_cast<std::int64_t>(i)) {
        edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(label[w])});
      }
    }
  }
  return UndirectedGraph(static_cast<std::int64_t>(vertices.size()), edges);
}

UnionFind::UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

Components connected_components(std::int64_t n, std::span<const Edge> edges) {
  UnionFind uf(n);
  for (const Edge& e : edges) {
    if (e.source != e.head) uf.unite(e.source, e.head);
  }
  Components c;
  std::size_t best_root = 0;
  std::size_t best_size = 0;
  for (std::int64_t v = 0; v < n; ++v) {
    if (uf.find(v) == static_cast<std::size_t>(v)) {
      c.sizes.push_back(static_cast<std::int64_t>(uf.component_size(v)));
      if (uf.component_size(v) > best_size) {
        best_size = uf.component_size(v);
        best_root = v;
      }
    }
  }
  std::sort(c.sizes.rbegin(), c.sizes.rend());
  for (std::int64_t v = 0; v < n; ++v) {
    if (uf.find(v) == best_root) c.largest.push_back(static_cast<Vertex>(v));
  }
  return c;
}

namespace {

// BFS distances from src; returns the eccentricity and a farthest vertex.
struct Bfs {
  explicit Bfs(const UndirectedGraph& g) : g_(g), dist_(g.size(), -1), parent_(g.size()) {}

  std::pair<std::int64_t, Vertex> run(Vertex src) {
    ++runs;
    std::fill(dist_.begin(), dist_.end(), -1);
    queue_.clear();
    queue_.push_back(src);
    dist_[src] = 0;
    parent_[src] = src;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const Vertex v = queue_[head];
      for (Vertex w : g_.neighbors(v)) {
        if (dist_[w] < 0) {
          dist_[w] = dist_[v] + 1;
          parent_[w] = v;
          queue_.push_back(w);
        }
      }
    }
    const Vertex far = queue_.back();
    return {dist_[far], far};
  }

  const UndirectedGraph& g_;
  std::vector<std::int64_t> dist_;
  std::vector<Vertex> parent_;
  std::vector<Vertex> queue_;
  std::int64_t runs = 0;
};

std::int64_t ifub(const UndirectedGraph& g, Bfs& bfs) {
  // Start from the midpoint of a double sweep rooted at the max-degree vertex.
  Vertex r = 0;
  for (Vertex v = 1; v < g.size(); ++v) {
    if (g.degree(v) > g.degree(r)) r = v;
  }
  const Vertex a = bfs.run(r).second;
  auto [ecc_a, b] = bfs.run(a);
  Vertex u = b;
  for (std::int64_t step = 0; step < ecc_a / 2; ++step) u = bfs.parent_[u];

  const std::int64_t ecc_u = bfs.run(u).first;
  std::vector<std::vector<Vertex>> levels(ecc_u + 1);
  for (Vertex v = 0; v < g.size(); ++v) levels[bfs.dist_[v]].push_back(v);

  std::int64_t lb = std::max(ecc_a, ecc_u);
  std::int64_t ub = 2 * ecc_u;
  for (std::int64_t i = ecc_u; ub > lb && i > 0; --i) {
    std::int64_t bi = 0;
    for (Vertex v : levels[i]) bi = std::max(bi, bfs.run(v).first);
    if (std::max(lb, bi) > 2 * (i - 1)) return std::max(lb, bi);
    lb = std::max(lb, bi);
    ub = 2 * (i - 1);
  }
  return lb;
}

}  // namespace

DiameterResult diameter(const UndirectedGraph& g, DiameterMethod method, int samples,
                        std::uint64_t seed) {
  DiameterResult out;
  out.method = method;
  const Components comps = [&] {
    std::vector<Edge> edges;
    for (Vertex v = 0; v < g.size(); ++v) {
      for (Vertex w : g.neighbors(v)) {
        if (w > v) edges.push_back({v, w});
      }
    }
    return connected_components(g.size(), edges);
  }();
  out.largest_component = !comps.connected();
  out.component_size = comps.sizes.empty() ? 0 : comps.sizes.front();
  if (out.component_size <= 1) return out;
  const UndirectedGraph sub = out.largest_component ? g.induced(comps.largest) : g;

  Bfs bfs(sub);
  switch (method) {
    case DiameterMethod::exact:
      if (sub.size() > kExactDiameterLimit) {
        throw std::invalid_argument("diameter: exact method is limited to " +
                                    std::to_string(kExactDiameterLimit) +
                                    " vertices; use ifub or sampled");
      }
      for (Vertex v = 0; v < sub.size(); ++v) out.value = std::max(out.value, bfs.run(v).first);
      break;
    case DiameterMethod::ifub:
      out.value = ifub(sub, bfs);
      break;
    case DiameterMethod::sampled: {
      if (samples < 1) throw std::invalid_argument("diameter: sampled needs samples >= 1");
      Rng rng(seed);
      for (int s = 0; s < samples; ++s) {
        const auto start = static_cast<Vertex>(rng.below(sub.size()));
        const Vertex a = bfs.run(start).second;
        out.value = std::max(out.value, bfs.run(a).first);
      }
      out.lower_bound = true;
      break;
    }
  }
  out.bfs_runs = bfs.runs;
  return out;
}

DiameterMethod parse_diameter_method(const std::string& s) {
  if (s == "exact") return DiameterMethod::exact;
  if (s == "ifub") return DiameterMethod::ifub;
  if (s == "sampled") return DiameterMethod::sampled;
  throw std::invalid_argument("unknown diameter method '" + s + "' (exact | ifub | sampled)");
}

std::string to_string(DiameterMethod m) {
  switch (m) {
    case DiameterMethod::exact: return "exact";
    case DiameterMethod::ifub: return "ifub";
    case DiameterMethod::sampled: return "sampled";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Empirical vs theory

Comparison compare_empirical_theory(std::span<const DegreeHistogram> ensemble,
                                    const DegreeTable* table, std::int64_t k_lo,
                                    std::int64_t k_hi) {
  if (ensemble.size() < 2) throw std::invalid_argument("compare_empirical_theory: needs >= 2 replicas");
  Comparison c;
  c.theory_available = table != nullptr;
  if (!table) c.note = "theory unavailable: the limiting degree law requires alpha > 2";
  if (k_hi < 0) {
    for (const auto& h : ensemble) k_hi = std::max(k_hi, h.max_degree());
  }
  const auto r = static_cast<double>(ensemble.size());
  for (std::int64_t k = std::max<std::int64_t>(k_lo, 0); k <= k_hi; ++k) {
    auto frac = [k](const DegreeHistogram& h) {
      return static_cast<double>(h.count(k)) / static_cast<double>(h.sigma);
    };
    // Shifted by the first replica so identical replicas give exactly zero spread.
    const double f0 = frac(ensemble.front());
    double shift = 0.0;
    for (const auto& h : ensemble) shift += frac(h) - f0;
    const double mean = f0 + shift / r;
    double ss = 0.0;
    for (const auto& h : ensemble) ss += (frac(h) - mean) * (frac(h) - mean);
    const double var = ss / (r - 1.0);
    ComparisonRow row{k, mean, std::sqrt(var / r), 0.0, 0.0};
    if (table) {
      row.p_k = table->at(k);
      const double diff = mean - row.p_k;
      row.z = row.stderr_ > 0.0 ? diff / row.stderr_
                                : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    }
    c.rows.push_back(row);
  }
  return c;
}

double exceedance_fraction(std::span<const double> values, double expected, double band) {
  if (values.empty()) return 0.0;
  const auto over = std::count_if(values.begin(), values.end(),
                                  [&](double v) { return std::abs(v - expected) > band; });
  return static_cast<double>(over) / static_cast<double>(values.size());
}

void write_histogram_csv(const DegreeHistogram& h, std::ostream& out) {
  out << "k,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    if (h.counts[k] > 0) out << k << ',' << h.counts[k] << '\n';
  }
}

DegreeHistogram read_histogram_csv(std::istream& in) {
  DegreeHistogram h;
  std::string line;
  if (!std::getline(in, line) || line != "k,count") {
    throw std::invalid_argument("degree_hist.csv: expected header 'k,count'");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::int64_t k = 0, c = 0;
    char comma = 0;
    if (!(row >> k >> comma >> c) || comma != ',') {
      throw std::invalid_argument("degree_hist.csv: malformed line '" + line + "'");
    }
    h.add(k, c);
  }
  h.sigma = h.total();
  return h;
}

void write_comparison_csv(const Comparison& c, std::ostream& out) {
  out << "k,mean,stderr,p_k,z\n";
  out.precision(12);
  for (const auto& r : c.rows) {
    out << r.k << ',' << r.mean << ',' << r.stderr_ << ',';
    if (c.theory_available) {
      out << r.p_k << ',' << r.z;
    } else {
      out << ",";
    }
    out << '\n';
  }
}

void to_json(nlohmann::json& j, const TailFit& f) {
  j = {{"k_min", f.k_min},           {"n_tail", f.n_tail}, {"sufficient", f.sufficient},
       {"mle_exponent", f.mle},      {"mle_stderr", f.mle_stderr},
       {"ls_exponent", f.ls},        {"ls_stderr", f.ls_stderr},
       {"ks_statistic", f.ks_statistic}};
  if (f.gof_pvalue >= 0.0) j["gof_pvalue"] = f.gof_pvalue;
}

void to_json(nlohmann::json& j, const DiameterResult& d) {
  j = {{"value", d.value},
       {"method", to_string(d.method)},
       {"lower_bound", d.lower_bound},
       {"largest_component_only", d.largest_component},
       {"component_size", d.component_size}};
}

}  // namespace gpaf
