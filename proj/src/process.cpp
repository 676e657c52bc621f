#include "gpaf/process.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gpaf {

std::int64_t DegreeHistogram::total() const {
  std::int64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

std::int64_t DegreeHistogram::degree_sum() const {
  std::int64_t s = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) s += static_cast<std::int64_t>(k) * counts[k];
  return s;
}

void DegreeHistogram::add(std::int64_t k, std::int64_t times) {
  if (k < 0) throw std::invalid_argument("DegreeHistogram: negative degree");
  if (k >= static_cast<std::int64_t>(counts.size())) counts.resize(k + 1, 0);
  counts[k] += times;
}

// ---------------------------------------------------------------------------
// ProcessParams

void ProcessParams::validate() const {
  if (n < 1) throw std::invalid_argument("n must satisfy n >= 1");
  if (n > static_cast<std::int64_t>(UINT32_MAX) - 1) {
    throw std::invalid_argument("n exceeds the 32-bit vertex id range");
  }
  if (m < 1) throw std::invalid_argument("m must satisfy m >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must satisfy alpha > 0");
  if (!(delta > -m) || !std::isfinite(delta)) {
    throw std::invalid_argument("delta must satisfy δ > −m (got delta = " + std::to_string(delta) +
                                ", m = " + std::to_string(m) + ")");
  }
}

std::vector<std::string> ProcessParams::warnings() const {
  std::vector<std::string> out;
  if (alpha <= 2.0) {
    out.push_back("alpha <= 2: the limiting degree law needs alpha > 2");
  }
  return out;
}

void to_json(nlohmann::json& j, const ProcessParams& p) {
  j = {{"n", p.n},         {"m", p.m},       {"alpha", p.alpha},
       {"delta", p.delta}, {"kernel", p.kernel}, {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, ProcessParams& p) {
  p.n = j.at("n").get<std::int64_t>();
  p.m = j.at("m").get<int>();
  p.alpha = j.at("alpha").get<double>();
  p.delta = j.value("delta", 0.0);
  p.kernel = j.contains("kernel") ? j.at("kernel").get<FitnessKernel>() : FitnessKernel::constant();
  p.seed = j.value("seed", std::uint64_t{0});
}

// ---------------------------------------------------------------------------
// GraphState

void GraphState::reserve(std::int64_t n) {
  xs_.reserve(n);
  ys_.reserve(n);
  zs_.reserve(n);
  degree_.reserve(n);
  weight_.reserve(n);
  edges_.reserve(static_cast<std::size_t>(n) * m_);
}

void GraphState::add_vertex(const SpherePoint& position, std::span<const Vertex> heads) {
  if (static_cast<int>(heads.size()) != m_) {
    throw std::invalid_argument("add_vertex: expected exactly m heads");
  }
  const auto v = static_cast<Vertex>(degree_.size());
  xs_.push_back(position.x);
  ys_.push_back(position.y);
  zs_.push_back(position.z);
  degree_.push_back(m_);
  weight_.push_back(m_ + delta_);
  for (Vertex h : heads) {
    if (h > v) throw std::invalid_argument("add_vertex: head refers to a future vertex");
    edges_.push_back({v, h});
    degree_[h] += 1;
    weight_[h] += 1.0;
  }
}

std::optional<std::string> GraphState::violation() const {
  const std::int64_t n = sigma();
  if (static_cast<std::int64_t>(edges_.size()) != n * m_) {
    return "edge count " + std::to_string(edges_.size()) + " != m * sigma";
  }
  std::vector<std::int64_t> in(n, 0);
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(edges_.size()); ++i) {
    const Edge& e = edges_[i];
    if (e.source != i / m_) return "edge " + std::to_string(i) + " has the wrong source";
    if (e.head > e.source) return "edge " + std::to_string(i) + " points to a later vertex";
    in[e.head] += 1;
  }
  std::int64_t sum = 0;
  for (std::int64_t v = 0; v < n; ++v) {
    if (degree_[v] != m_ + in[v]) {
      return "degree of vertex " + std::to_string(v + 1) + " != m + in-degree";
    }
    if (weight_[v] != static_cast<double>(degree_[v]) + delta_) {
      return "attachment weight of vertex " + std::to_string(v + 1) + " out of sync";
    }
    const double norm = std::sqrt(xs_[v] * xs_[v] + ys_[v] * ys_[v] + zs_[v] * zs_[v]);
    if (std::abs(norm - 1.0) > 1e-12) return "position of vertex " + std::to_string(v + 1) + " not unit";
    sum += degree_[v];
  }
  if (sum != 2 * static_cast<std::int64_t>(m_) * n) return "degree sum != 2 m sigma";
  return std::nullopt;
}

std::int64_t GraphState::self_loop_count() const {
  return std::count_if(edges_.begin(), edges_.end(),
                       [](const Edge& e) { return e.source == e.head; });
}

DegreeHistogram degree_histogram(const GraphState& state) {
  DegreeHistogram h;
  h.sigma = state.sigma();
  for (auto d : state.degrees()) h.add(d);
  return h;
}

// ---------------------------------------------------------------------------
// Model and the attachment law

Model::Model(ProcessParams p) : params(std::move(p)) {
  params.validate();
  i_n = attractiveness_integral(params.kernel);
  theta = params.theta();
  floor_coef = params.alpha * theta * i_n;
}

double total_attraction(const GraphState& state, const SpherePoint& u,
                        const FitnessKernel& kernel, double delta) {
  const auto xs = state.xs();
  const auto ys = state.ys();
  const auto zs = state.zs();
  const auto deg = state.degrees();
  double t = 0.0;
  for (std::size_t v = 0; v < deg.size(); ++v) {
    const double c = xs[v] * u.x + ys[v] * u.y + zs[v] * u.z;
    t += (static_cast<double>(deg[v]) + delta) * kernel.evaluate_cos(c);
  }
  return t;
}

double normalizer(double t, std::int64_t sigma, double alpha, double theta, double i_n) {
  if (sigma <= 0) return 0.0;
  return std::max(t, alpha * theta * i_n * static_cast<double>(sigma));
}

std::vector<double> attachment_distribution(const GraphState& state, const SpherePoint& u,
                                            const Model& model) {
  const std::int64_t sigma = state.sigma();
  if (sigma < 1) throw std::invalid_argument("attachment_distribution: needs sigma >= 1");
  std::vector<double> p(sigma + 1, 0.0);
  const auto w = state.attachment_weights();
  double t = 0.0;
  for (std::int64_t v = 0; v < sigma; ++v) {
    p[v] = w[v] * model.params.kernel.evaluate_cos(state.position(v).dot(u));
    t += p[v];
  }
  const double m = normalizer(t, sigma, model.params.alpha, model.theta, model.i_n);
  for (std::int64_t v = 0; v < sigma; ++v) p[v] /= m;
  p[sigma] = 1.0 - t / m;
  return p;
}

// ---------------------------------------------------------------------------
// ExactSampler

namespace {

template <class WeightFn>
double fill_blocks(std::size_t n, std::vector<double>& blocks, WeightFn weight) {
  constexpr std::size_t B = ExactSampler::kBlock;
  blocks.resize((n + B - 1) / B);
  double total = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t lo = b * B;
    const std::size_t hi = std::min(n, lo + B);
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t v = lo; v < hi; ++v) s += weight(v);
    blocks[b] = s;
    total += s;
  }
  return total;
}

// Weight of vertex v against u, the same arithmetic as fill_blocks uses.
double weight_of(const GraphState& s, const SpherePoint& u, const FitnessKernel& k, std::size_t v) {
  const double c = s.xs()[v] * u.x + s.ys()[v] * u.y + s.zs()[v] * u.z;
  return s.attachment_weights()[v] * k.evaluate_cos(c);
}

}  // namespace

double ExactSampler::prepare(const GraphState& state, const SpherePoint& u,
                             const FitnessKernel& kernel) {
  const std::size_t n = static_cast<std::size_t>(state.sigma());
  const double* w = state.attachment_weights().data();
  const double* x = state.xs().data();
  const double* y = state.ys().data();
  const double* z = state.zs().data();
  const double ux = u.x, uy = u.y, uz = u.z;
  switch (kernel.variant().index()) {
    case 0:
      total_ = fill_blocks(n, blocks_, [w](std::size_t v) { return w[v]; });
      break;
    case 1: {
      const double c0 = kernel.cos_radius();
      total_ = fill_blocks(n, blocks_, [=](std::size_t v) {
        const double c = x[v] * ux + y[v] * uy + z[v] * uz;
        return c >= c0 ? w[v] : 0.0;
      });
      break;
    }
    default:
      total_ = fill_blocks(n, blocks_, [&](std::size_t v) {
        const double c = x[v] * ux + y[v] * uy + z[v] * uz;
        return w[v] * kernel.evaluate_cos(c);
      });
  }
  return total_;
}

Vertex ExactSampler::sample(const GraphState& state, const SpherePoint& u,
                            const FitnessKernel& kernel, double m, Rng& rng) const {
  const auto sigma = static_cast<Vertex>(state.sigma());
  const double r = rng.uniform() * m;
  if (!(total_ > 0.0) || r >= total_) return sigma;
  double acc = 0.0;
  std::size_t b = 0;
  for (; b + 1 < blocks_.size(); ++b) {
    if (acc + blocks_[b] > r) break;
    acc += blocks_[b];
  }
  // Walk the block; rounding may leave r past the last positive weight, in
  // which case the last positive-weight vertex seen is returned.
  const std::size_t lo = b * kBlock;
  const std::size_t hi = std::min<std::size_t>(state.sigma(), lo + kBlock);
  std::size_t last_positive = hi;
  for (std::size_t v = lo; v < hi; ++v) {
    const double wv = weight_of(state, u, kernel, v);
    if (wv > 0.0) {
      last_positive = v;
      acc += wv;
      if (acc > r) return static_cast<Vertex>(v);
    }
  }
  if (last_positive != hi) return static_cast<Vertex>(last_positive);
  // The chosen block had no mass; fall back to the last positive weight overall.
  for (std::size_t v = state.sigma(); v-- > 0;) {
    if (weight_of(state, u, kernel, v) > 0.0) return static_cast<Vertex>(v);
  }
  return sigma;
}

// ---------------------------------------------------------------------------
// FastSampler

FastSampler::FastSampler(const Model& model, double acceptance_floor)
    : model_(&model),
      expected_acceptance_(model.i_n / model.params.kernel.max_value()),
      fallback_(expected_acceptance_ < acceptance_floor) {}

void FastSampler::attach(const GraphState& state) {
  index_.clear();
  index_.reserve(model_->params.n);
  for (double w : state.attachment_weights()) index_.push_back(w);
}

void FastSampler::record_vertex(Vertex v, double base_weight, std::span<const Vertex> heads) {
  if (v != index_.size()) throw std::logic_error("FastSampler out of sync with the graph");
  index_.push_back(base_weight);
  for (Vertex h : heads) index_.add(h, 1.0);
}

void FastSampler::prepare(const GraphState& state, const SpherePoint& u) {
  const auto& p = model_->params;
  if (fallback_ || !p.kernel.is_constant()) {
    t_ = exact_.prepare(state, u, p.kernel);
  } else {
    t_ = (2.0 * p.m + p.delta) * static_cast<double>(state.sigma());
  }
  m_ = normalizer(t_, state.sigma(), p.alpha, model_->theta, model_->i_n);
}

Vertex FastSampler::sample(const GraphState& state, const SpherePoint& u, Rng& rng) {
  const auto& kernel = model_->params.kernel;
  if (fallback_) return exact_.sample(state, u, kernel, m_, rng);
  const auto sigma = static_cast<Vertex>(state.sigma());
  if (!(t_ > 0.0) || rng.uniform() * m_ >= t_) return sigma;
  if (kernel.is_constant()) return static_cast<Vertex>(index_.find(rng.uniform() * index_.total()));
  const double fmax = kernel.max_value();
  for (;;) {
    const auto v = index_.find(rng.uniform() * index_.total());
    const double f = kernel.evaluate_cos(state.position(static_cast<Vertex>(v)).dot(u));
    if (rng.uniform() * fmax < f) return static_cast<Vertex>(v);
  }
}

std::vector<double> FastSampler::law(const GraphState& state, const SpherePoint& u) const {
  const auto& p = model_->params;
  const std::int64_t sigma = state.sigma();
  if (sigma < 1) throw std::invalid_argument("FastSampler::law: needs sigma >= 1");
  std::vector<double> out(sigma + 1, 0.0);
  // Proposal weight times acceptance probability, per vertex.
  double accepted = 0.0;
  for (std::int64_t v = 0; v < sigma; ++v) {
    const double a = p.kernel.evaluate_cos(state.position(v).dot(u)) / p.kernel.max_value();
    out[v] = index_.weight(v) * a;
    accepted += out[v];
  }
  double t;
  if (fallback_ || !p.kernel.is_constant()) {
    t = total_attraction(state, u, p.kernel, p.delta);
  } else {
    t = (2.0 * p.m + p.delta) * static_cast<double>(sigma);
  }
  const double m = normalizer(t, sigma, p.alpha, model_->theta, model_->i_n);
  const double old_mass = t / m;
  for (std::int64_t v = 0; v < sigma; ++v) out[v] = accepted > 0.0 ? old_mass * out[v] / accepted : 0.0;
  out[sigma] = 1.0 - old_mass;
  return out;
}

// ---------------------------------------------------------------------------
// Process

StepInfo grow_one_step(GraphState& state, const Model& model, Rng& rng) {
  StepInfo info;
  info.position = sample_uniform(rng);
  const auto sigma = static_cast<Vertex>(state.sigma());
  std::vector<Vertex> heads(model.params.m, sigma);
  if (sigma > 0) {
    ExactSampler sampler;
    info.t = sampler.prepare(state, info.position, model.params.kernel);
    info.m = normalizer(info.t, sigma, model.params.alpha, model.theta, model.i_n);
    for (auto& h : heads) h = sampler.sample(state, info.position, model.params.kernel, info.m, rng);
  }
  info.self_loops = static_cast<int>(std::count(heads.begin(), heads.end(), sigma));
  state.add_vertex(info.position, heads);
  return info;
}

Process::Process(const Model& model, Rng rng, SamplerKind sampler, double acceptance_floor)
    : model_(&model),
      rng_(rng),
      kind_(sampler),
      state_(model.params.m, model.params.delta),
      heads_(model.params.m) {
  state_.reserve(model.params.n);
  if (kind_ == SamplerKind::fast) {
    fast_.emplace(model, acceptance_floor);
    fast_->attach(state_);
  }
}

StepInfo Process::step() { return step_at(sample_uniform(rng_)); }

StepInfo Process::step_at(const SpherePoint& u) {
  const auto& p = model_->params;
  StepInfo info;
  info.position = u;
  const auto sigma = static_cast<Vertex>(state_.sigma());
  // First vertex: V_0 is empty, so all m edges are self-loops.
  std::fill(heads_.begin(), heads_.end(), sigma);
  if (sigma > 0) {
    if (kind_ == SamplerKind::exact) {
      info.t = exact_.prepare(state_, u, p.kernel);
      info.m = normalizer(info.t, sigma, p.alpha, model_->theta, model_->i_n);
      for (auto& h : heads_) h = exact_.sample(state_, u, p.kernel, info.m, rng_);
    } else {
      fast_->prepare(state_, u);
      info.t = fast_->t();
      info.m = fast_->normalizer_value();
      info.fallback = fast_->uses_fallback();
      for (auto& h : heads_) h = fast_->sample(state_, u, rng_);
    }
  }
  info.self_loops = static_cast<int>(std::count(heads_.begin(), heads_.end(), sigma));
  state_.add_vertex(u, heads_);
  if (fast_) fast_->record_vertex(sigma, p.m + p.delta, heads_);
  return info;
}

RunResult run(const ProcessParams& params, const RunOptions& options) {
  const Model model(params);
  return run(model, options);
}

RunResult run(const Model& model, const RunOptions& options) {
  const auto& p = model.params;
  const double bytes = static_cast<double>(p.n) *
                       (static_cast<double>(p.m) * sizeof(Edge) + 5.0 * sizeof(double));
  if (bytes > static_cast<double>(options.memory_limit_bytes)) {
    throw std::length_error("run: n = " + std::to_string(p.n) + ", m = " + std::to_string(p.m) +
                            " needs about " + std::to_string(bytes / (1 << 20)) +
                            " MiB, above the configured limit");
  }
  for (std::size_t i = 0; i < options.snapshot_times.size(); ++i) {
    const auto t = options.snapshot_times[i];
    if (t < 1 || t > p.n || (i > 0 && t <= options.snapshot_times[i - 1])) {
      throw std::invalid_argument("snapshot times must be strictly increasing within [1, n]");
    }
  }
  const Rng base = Rng::for_replica(p.seed, options.replica);
  Process proc(model, base, options.sampler, options.acceptance_floor);
  Rng probe = base.split(1);
  RunResult out{GraphState(p.m, p.delta), {}};
  std::size_t next_snapshot = 0;
  for (std::int64_t s = 0; s < p.n; ++s) {
    proc.step();
    if (next_snapshot < options.snapshot_times.size() &&
        options.snapshot_times[next_snapshot] == proc.state().sigma()) {
      Snapshot snap{proc.state().sigma(), degree_histogram(proc.state()), {}};
      for (int i = 0; i < options.t_samples; ++i) {
        snap.t_samples.push_back(
            total_attraction(proc.state(), sample_uniform(probe), p.kernel, p.delta));
      }
      out.snapshots.push_back(std::move(snap));
      ++next_snapshot;
    }
  }
  out.state = proc.state();
  return out;
}

// ---------------------------------------------------------------------------
// Export

void write_edges_tsv(const GraphState& state, std::ostream& out) {
  out << "src\thead\n";
  for (const Edge& e : state.edges()) out << e.source + 1 << '\t' << e.head + 1 << '\n';
}

GraphState read_edges_tsv(std::istream& in, int m, double delta) {
  std::vector<Edge> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "src\thead") continue;
    std::istringstream row(line);
    long long s = 0, h = 0;
    if (!(row >> s >> h) || s < 1 || h < 1) {
      throw std::invalid_argument("edges.tsv: malformed line '" + line + "'");
    }
    edges.push_back({static_cast<Vertex>(s - 1), static_cast<Vertex>(h - 1)});
  }
  if (m <= 0) {
    m = static_cast<int>(std::count_if(edges.begin(), edges.end(),
                                       [](const Edge& e) { return e.source == 0; }));
  }
  if (m <= 0 || edges.size() % m != 0) {
    throw std::invalid_argument("edges.tsv: edge count is not a multiple of m");
  }
  GraphState state(m, delta);
  std::vector<Vertex> heads(m);
  for (std::size_t v = 0; v * m < edges.size(); ++v) {
    for (int i = 0; i < m; ++i) {
      const Edge& e = edges[v * m + i];
      if (e.source != v) throw std::invalid_argument("edges.tsv: vertex does not emit exactly m edges");
      heads[i] = e.head;
    }
    state.add_vertex(SpherePoint::north_pole(), heads);
  }
  return state;
}

void write_positions_csv(const GraphState& state, std::ostream& out) {
  out << "vertex,x,y,z\n";
  out.precision(17);
  for (std::int64_t v = 0; v < state.sigma(); ++v) {
    out << v + 1 << ',' << state.xs()[v] << ',' << state.ys()[v] << ',' << state.zs()[v] << '\n';
  }
}

nlohmann::json run_manifest(const ProcessParams& params) {
  return {{"params", params}, {"version", kVersion}, {"seed", params.seed}};
}

}  // namespace gpaf
