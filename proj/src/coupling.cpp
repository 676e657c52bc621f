#include "gpaf/coupling.hpp"

#include "gpaf/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace gpaf {

std::string to_string(BallColor c) {
  switch (c) {
    case BallColor::white: return "white";
    case BallColor::red: return "red";
    case BallColor::purple: return "purple";
    case BallColor::orange: return "orange";
    case BallColor::green: return "green";
    case BallColor::blue: return "blue";
  }
  return "?";
}

namespace {

double norm_of(const std::vector<Ball>& balls) {
  double s = 0.0;
  for (const Ball& b : balls) s += b.weight;
  return s;
}

bool allowed(UrnPart part, BallColor c) {
  switch (part) {
    case UrnPart::common:
      return c == BallColor::white || c == BallColor::red || c == BallColor::green;
    case UrnPart::only_u:
      return c == BallColor::white || c == BallColor::purple || c == BallColor::blue;
    case UrnPart::only_hat:
      return c == BallColor::white || c == BallColor::orange;
  }
  return false;
}

// Weight-proportional pick from `balls` given target in [0, total).
std::size_t pick(const std::vector<Ball>& balls, double target) {
  std::size_t last_positive = balls.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    if (balls[i].weight <= 0.0) continue;
    last_positive = i;
    acc += balls[i].weight;
    if (acc > target) return i;
  }
  if (last_positive == balls.size()) throw std::logic_error("joint_draw: drawing from an empty urn part");
  return last_positive;
}

}  // namespace

// ---------------------------------------------------------------------------
// UrnPair

UrnPair UrnPair::from_parts(std::vector<Ball> common, std::vector<Ball> only_u,
                            std::vector<Ball> only_hat) {
  auto check = [](const std::vector<Ball>& balls, UrnPart part, const char* name) {
    for (const Ball& b : balls) {
      if (!allowed(part, b.color)) {
        throw std::invalid_argument(std::string("UrnPair: a ") + to_string(b.color) +
                                    " ball cannot belong to " + name);
      }
      if (!(b.weight >= 0.0)) throw std::invalid_argument("UrnPair: negative ball weight");
    }
  };
  check(common, UrnPart::common, "C");
  check(only_u, UrnPart::only_u, "R");
  check(only_hat, UrnPart::only_hat, "L");
  UrnPair p;
  p.common = std::move(common);
  p.only_u = std::move(only_u);
  p.only_hat = std::move(only_hat);
  if (p.u_norm() > p.hat_norm() * (1.0 + 1e-12)) {
    throw std::invalid_argument("UrnPair: labeling requires ||U|| <= ||U-hat||");
  }
  return p;
}

double UrnPair::common_norm() const { return norm_of(common); }
double UrnPair::only_u_norm() const { return norm_of(only_u); }
double UrnPair::only_hat_norm() const { return norm_of(only_hat); }

double UrnPair::mismatch_probability() const {
  const double h = hat_norm();
  return h > 0.0 ? only_hat_norm() / h : 0.0;
}

const Ball& UrnPair::ball(const BallRef& r) const {
  switch (r.part) {
    case UrnPart::common: return common.at(r.index);
    case UrnPart::only_u: return only_u.at(r.index);
    case UrnPart::only_hat: return only_hat.at(r.index);
  }
  throw std::logic_error("UrnPair::ball");
}

UrnPair build_urns(const GraphState& state, const GraphState& state_hat,
                   const SpherePoint& x_next, std::int64_t tau, const Model& model) {
  const std::int64_t sigma = state.sigma();
  if (state_hat.sigma() != sigma) throw std::invalid_argument("build_urns: states differ in size");
  if (tau < 1 || tau > sigma) throw std::invalid_argument("build_urns: tau must lie in [1, sigma]");
  const int m = model.params.m;
  const double delta = model.params.delta;
  if (state.m() != m || state_hat.m() != m) throw std::invalid_argument("build_urns: m mismatch");
  const auto tv = static_cast<Vertex>(tau - 1);
  for (std::int64_t v = 0; v < sigma; ++v) {
    if (v != tv && !(state.position(v) == state_hat.position(v))) {
      throw std::invalid_argument("build_urns: positions differ at a vertex other than tau");
    }
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(tv) * m; ++i) {
    if (!(state.edges()[i] == state_hat.edges()[i])) {
      throw std::invalid_argument("build_urns: histories before tau differ");
    }
  }

  const auto& kernel = model.params.kernel;
  auto attraction = [&](const GraphState& g) {
    return total_attraction(g, x_next, kernel, delta);
  };
  const GraphState* gu = &state;
  const GraphState* gh = &state_hat;
  UrnPair pair;
  pair.t = attraction(*gu);
  pair.t_hat = attraction(*gh);
  if (pair.t > pair.t_hat) {
    std::swap(gu, gh);
    std::swap(pair.t, pair.t_hat);
    pair.swapped = true;
  }

  std::vector<double> a(sigma);
  for (std::int64_t v = 0; v < sigma; ++v) a[v] = kernel.evaluate_cos(gu->position(v).dot(x_next));
  const double a_tau_hat = kernel.evaluate_cos(gh->position(tv).dot(x_next));

  std::vector<std::int64_t> white_u(sigma, 0), white_hat(sigma, 0);
  for (const Edge& e : gu->edges()) {
    if (e.head != tv) ++white_u[e.head];
  }
  for (const Edge& e : gh->edges()) {
    if (e.head != tv) ++white_hat[e.head];
  }
  for (std::int64_t v = 0; v < sigma; ++v) {
    if (v == tv) continue;
    pair.common.push_back({BallColor::red, v, (m + delta) * a[v]});
    const auto shared = std::min(white_u[v], white_hat[v]);
    for (std::int64_t i = 0; i < shared; ++i) pair.common.push_back({BallColor::white, v, a[v]});
    for (std::int64_t i = shared; i < white_u[v]; ++i) pair.only_u.push_back({BallColor::white, v, a[v]});
    for (std::int64_t i = shared; i < white_hat[v]; ++i) {
      pair.only_hat.push_back({BallColor::white, v, a[v]});
    }
  }
  const double floor = model.floor_coef * static_cast<double>(sigma);
  const double green = std::max(0.0, floor - pair.t_hat);
  const double blue = std::max(0.0, std::max(0.0, floor - pair.t) - green);
  pair.common.push_back({BallColor::green, sigma, green});
  pair.only_u.push_back({BallColor::purple, tv, (gu->degree(tv) + delta) * a[tv]});
  pair.only_u.push_back({BallColor::blue, sigma, blue});
  pair.only_hat.push_back({BallColor::orange, tv, (gh->degree(tv) + delta) * a_tau_hat});
  return pair;
}

JointDraw joint_draw(const UrnPair& pair, Rng& rng) {
  const double c = pair.common_norm();
  const double u = c + pair.only_u_norm();
  const double hat = c + pair.only_hat_norm();
  if (!(u > 0.0)) throw std::logic_error("joint_draw: empty urn");
  const double r = rng.uniform() * u;
  JointDraw d;
  if (r < c) {
    d.ball = {UrnPart::common, pick(pair.common, r)};
    if (rng.uniform() * hat < u) {
      d.ball_hat = d.ball;
      return d;
    }
  } else {
    d.ball = {UrnPart::only_u, pick(pair.only_u, r - c)};
  }
  d.ball_hat = {UrnPart::only_hat, pick(pair.only_hat, rng.uniform() * pair.only_hat_norm())};
  return d;
}

std::vector<JointOutcome> joint_law(const UrnPair& pair) {
  const double c = pair.common_norm();
  const double u = c + pair.only_u_norm();
  const double hat = c + pair.only_hat_norm();
  const double l = pair.only_hat_norm();
  std::vector<JointOutcome> out;
  auto to_l = [&](BallRef b, double p) {
    if (!(p > 0.0)) return;
    for (std::size_t j = 0; j < pair.only_hat.size(); ++j) {
      const double w = pair.only_hat[j].weight;
      if (w > 0.0) out.push_back({b, {UrnPart::only_hat, j}, p * w / l});
    }
  };
  for (std::size_t i = 0; i < pair.common.size(); ++i) {
    const double w = pair.common[i].weight;
    if (!(w > 0.0)) continue;
    const BallRef b{UrnPart::common, i};
    out.push_back({b, b, w / hat});
    to_l(b, w / u * (1.0 - u / hat));
  }
  for (std::size_t i = 0; i < pair.only_u.size(); ++i) {
    const double w = pair.only_u[i].weight;
    if (w > 0.0) to_l({UrnPart::only_u, i}, w / u);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CoupledProcess

namespace {

struct CoupledSums {
  double common = 0.0, first = 0.0, second = 0.0;
};

// Block sums of min(w_a, w_b) A(v); totals of w_a A(v) and w_b A(v).
template <class AFn>
CoupledSums fill_coupled(std::size_t n, const double* wa, const double* wb,
                         std::vector<double>& blocks, AFn attraction) {
  constexpr std::size_t B = ExactSampler::kBlock;
  blocks.resize((n + B - 1) / B);
  CoupledSums total;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t lo = b * B;
    const std::size_t hi = std::min(n, lo + B);
    double sc = 0.0, sa = 0.0, sb = 0.0;
#pragma omp simd reduction(+ : sc, sa, sb)
    for (std::size_t v = lo; v < hi; ++v) {
      const double av = attraction(v);
      sa += wa[v] * av;
      sb += wb[v] * av;
      sc += std::min(wa[v], wb[v]) * av;
    }
    blocks[b] = sc;
    total.common += sc;
    total.first += sa;
    total.second += sb;
  }
  return total;
}

}  // namespace

CoupledProcess::CoupledProcess(const Model& model, std::int64_t tau, Rng rng)
    : model_(&model),
      tau_(tau),
      tv_(static_cast<Vertex>(tau - 1)),
      rng_(rng),
      a_(model.params.m, model.params.delta),
      b_(model.params.m, model.params.delta) {
  if (tau < 1 || tau > model.params.n) throw std::invalid_argument("coupling: tau must lie in [1, n]");
  GraphState shared(model.params.m, model.params.delta);
  shared.reserve(model.params.n);
  for (std::int64_t s = 1; s < tau; ++s) grow_one_step(shared, model, rng_);
  a_ = shared;
  b_ = std::move(shared);
  grow_one_step(a_, model, rng_);
  grow_one_step(b_, model, rng_);
  rebuild_diff();
}

CoupledProcess::CoupledProcess(const Model& model, std::int64_t tau, GraphState a, GraphState b,
                               Rng rng)
    : model_(&model),
      tau_(tau),
      tv_(static_cast<Vertex>(tau - 1)),
      rng_(rng),
      a_(std::move(a)),
      b_(std::move(b)) {
  if (a_.sigma() != b_.sigma() || tau < 1 || tau > a_.sigma()) {
    throw std::invalid_argument("coupling: states must have equal size >= tau");
  }
  rebuild_diff();
}

void CoupledProcess::rebuild_diff() {
  in_diff_.assign(std::max<std::int64_t>(model_->params.n, a_.sigma()) + 1, 0);
  diff_.clear();
  for (std::int64_t v = 0; v < a_.sigma(); ++v) {
    if (v != tv_ && a_.degree(v) != b_.degree(v)) {
      diff_.push_back(static_cast<Vertex>(v));
      in_diff_[v] = 1;
    }
  }
}

void CoupledProcess::note_heads(std::span<const Vertex> heads_a, std::span<const Vertex> heads_b) {
  auto touch = [&](Vertex v) {
    if (v != tv_ && !in_diff_[v] && a_.degree(v) != b_.degree(v)) {
      in_diff_[v] = 1;
      diff_.push_back(v);
    }
  };
  for (Vertex h : heads_a) touch(h);
  for (Vertex h : heads_b) touch(h);
  touch(static_cast<Vertex>(a_.sigma() - 1));
}

const CoupledProcess::Prepared& CoupledProcess::prepare(const SpherePoint& x) {
  const auto& kernel = model_->params.kernel;
  x_ = x;
  const auto n = static_cast<std::size_t>(a_.sigma());
  const double* wa = a_.attachment_weights().data();
  const double* wb = b_.attachment_weights().data();
  const double* px = a_.xs().data();
  const double* py = a_.ys().data();
  const double* pz = a_.zs().data();
  CoupledSums sums;
  switch (kernel.variant().index()) {
    case 0:
      sums = fill_coupled(n, wa, wb, blocks_, [](std::size_t) { return 1.0; });
      break;
    case 1: {
      const double c0 = kernel.cos_radius();
      sums = fill_coupled(n, wa, wb, blocks_, [=](std::size_t v) {
        return px[v] * x.x + py[v] * x.y + pz[v] * x.z >= c0 ? 1.0 : 0.0;
      });
      break;
    }
    default:
      sums = fill_coupled(n, wa, wb, blocks_, [&](std::size_t v) {
        return kernel.evaluate_cos(px[v] * x.x + py[v] * x.y + pz[v] * x.z);
      });
  }
  // Vertex tau sits at different positions in the two processes, and it has
  // no red or white balls: rebuild its block without it.
  const double at_a = kernel.evaluate_cos(a_.position(tv_).dot(x));
  const double at_b = kernel.evaluate_cos(b_.position(tv_).dot(x));
  sums.second += wb[tv_] * (at_b - at_a);
  {
    const std::size_t blk = tv_ / ExactSampler::kBlock;
    const std::size_t lo = blk * ExactSampler::kBlock;
    const std::size_t hi = std::min(n, lo + ExactSampler::kBlock);
    double s = 0.0;
    for (std::size_t v = lo; v < hi; ++v) {
      if (v == tv_) continue;
      s += std::min(wa[v], wb[v]) * kernel.evaluate_cos(a_.position(v).dot(x));
    }
    sums.common += s - blocks_[blk];
    blocks_[blk] = s;
  }
  common_vertices_ = 0.0;
  for (double b : blocks_) common_vertices_ += b;

  Prepared& p = prep_;
  p.swapped = sums.first > sums.second;
  p.t_u = p.swapped ? sums.second : sums.first;
  p.t_hat = p.swapped ? sums.first : sums.second;
  a_tau_u_ = p.swapped ? at_b : at_a;
  a_tau_hat_ = p.swapped ? at_a : at_b;
  const GraphState& gu = p.swapped ? b_ : a_;
  const GraphState& gh = p.swapped ? a_ : b_;

  const double floor = model_->floor_coef * static_cast<double>(n);
  green_ = std::max(0.0, floor - p.t_hat);
  blue_ = std::max(0.0, std::max(0.0, floor - p.t_u) - green_);
  purple_ = gu.attachment_weights()[tv_] * a_tau_u_;
  orange_ = gh.attachment_weights()[tv_] * a_tau_hat_;

  std::erase_if(diff_, [&](Vertex v) {
    if (a_.degree(v) == b_.degree(v)) {
      in_diff_[v] = 0;
      return true;
    }
    return false;
  });
  double only_u = purple_ + blue_;
  double only_hat = orange_;
  for (Vertex v : diff_) {
    const double av = kernel.evaluate_cos(a_.position(v).dot(x));
    const double surplus = (gu.attachment_weights()[v] - gh.attachment_weights()[v]) * av;
    if (surplus > 0.0) only_u += surplus;
    if (surplus < 0.0) only_hat -= surplus;
  }
  p.common = common_vertices_ + green_;
  p.only_u = only_u;
  p.only_hat = only_hat;
  p.u_norm = p.common + only_u;
  p.hat_norm = p.common + only_hat;
  p.mismatch_probability = p.hat_norm > 0.0 ? only_hat / p.hat_norm : 0.0;
  return p;
}

CoupledProcess::Pair CoupledProcess::draw(Rng& rng) const {
  const Prepared& p = prep_;
  const auto& kernel = model_->params.kernel;
  const auto sigma = static_cast<Vertex>(a_.sigma());
  const GraphState& gu = p.swapped ? b_ : a_;
  const GraphState& gh = p.swapped ? a_ : b_;

  // Draw from L: the Ĝ-side degree surplus on diff_, then the orange ball.
  auto draw_l = [&]() -> Vertex {
    double r = rng.uniform() * p.only_hat;
    Vertex last = tv_;
    for (Vertex v : diff_) {
      const double s = (gh.attachment_weights()[v] - gu.attachment_weights()[v]) *
                       kernel.evaluate_cos(a_.position(v).dot(x_));
      if (s > 0.0) {
        last = v;
        if (r < s) return v;
        r -= s;
      }
    }
    return orange_ > 0.0 ? tv_ : last;
  };
  auto draw_r = [&](double r) -> Vertex {
    Vertex last = tv_;
    for (Vertex v : diff_) {
      const double s = (gu.attachment_weights()[v] - gh.attachment_weights()[v]) *
                       kernel.evaluate_cos(a_.position(v).dot(x_));
      if (s > 0.0) {
        last = v;
        if (r < s) return v;
        r -= s;
      }
    }
    if (purple_ > 0.0) {
      if (r < purple_) return tv_;
      r -= purple_;
      last = tv_;
    }
    return blue_ > 0.0 ? sigma : last;
  };
  auto draw_common = [&](double r) -> Vertex {
    if (r >= common_vertices_) return sigma;  // green
    const double* wa = a_.attachment_weights().data();
    const double* wb = b_.attachment_weights().data();
    std::size_t blk = 0;
    for (; blk + 1 < blocks_.size(); ++blk) {
      if (r < blocks_[blk]) break;
      r -= blocks_[blk];
    }
    const std::size_t lo = blk * ExactSampler::kBlock;
    const std::size_t hi = std::min<std::size_t>(sigma, lo + ExactSampler::kBlock);
    std::size_t last = hi;
    for (std::size_t v = lo; v < hi; ++v) {
      if (v == tv_) continue;
      const double w = std::min(wa[v], wb[v]) * kernel.evaluate_cos(a_.position(v).dot(x_));
      if (w > 0.0) {
        last = v;
        if (r < w) return static_cast<Vertex>(v);
        r -= w;
      }
    }
    return last != hi ? static_cast<Vertex>(last) : sigma;
  };

  Pair out{};
  Vertex u_head;
  Vertex hat_head;
  const double r = rng.uniform() * p.u_norm;
  if (r < p.common) {
    u_head = draw_common(r);
    if (rng.uniform() * p.hat_norm < p.u_norm) {
      hat_head = u_head;
    } else {
      hat_head = draw_l();
      out.mismatch = true;
    }
  } else {
    u_head = draw_r(r - p.common);
    hat_head = draw_l();
    out.mismatch = true;
  }
  out.head_first = p.swapped ? hat_head : u_head;
  out.head_second = p.swapped ? u_head : hat_head;
  return out;
}

int CoupledProcess::step() {
  const int m = model_->params.m;
  const SpherePoint x = sample_uniform(rng_);
  prepare(x);
  heads_a_.resize(m);
  heads_b_.resize(m);
  int mism = 0;
  for (int i = 0; i < m; ++i) {
    const Pair p = draw(rng_);
    heads_a_[i] = p.head_first;
    heads_b_[i] = p.head_second;
    mism += p.mismatch ? 1 : 0;
  }
  a_.add_vertex(x, heads_a_);
  b_.add_vertex(x, heads_b_);
  note_heads(heads_a_, heads_b_);
  delta_ += mism;
  return mism;
}

CoupledRun run_coupled(const Model& model, std::int64_t tau, std::uint64_t replica,
                       bool keep_states) {
  CoupledProcess proc(model, tau, Rng::for_replica(model.params.seed, replica));
  CoupledRun out;
  out.tau = tau;
  out.trajectory.reserve(model.params.n - tau + 1);
  out.trajectory.push_back(0);
  while (proc.sigma() < model.params.n) {
    proc.step();
    out.trajectory.push_back(proc.mismatches());
  }
  if (keep_states) {
    out.first = proc.first();
    out.second = proc.second();
  }
  return out;
}

std::vector<double> mean_trajectory(std::span<const CoupledRun> ensemble) {
  if (ensemble.empty()) return {};
  std::vector<double> mean(ensemble.front().trajectory.size(), 0.0);
  for (const auto& r : ensemble) {
    if (r.trajectory.size() != mean.size() || r.tau != ensemble.front().tau) {
      throw std::invalid_argument("mean_trajectory: replicas differ in tau or length");
    }
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += static_cast<double>(r.trajectory[i]);
  }
  for (double& v : mean) v /= static_cast<double>(ensemble.size());
  return mean;
}

MismatchFit mismatch_growth_fit(std::span<const CoupledRun> ensemble, const Model& model,
                                std::int64_t window_start) {
  MismatchFit f;
  const auto& p = model.params;
  f.theory_a = degree_growth_exponent(p.m, p.alpha, p.delta);
  if (ensemble.empty()) {
    f.note = "no replicas";
    return f;
  }
  const std::int64_t tau = ensemble.front().tau;
  const std::int64_t n = tau + static_cast<std::int64_t>(ensemble.front().trajectory.size()) - 1;
  f.sigma_low = window_start > 0 ? window_start : 10 * tau;
  f.sigma_high = n;
  const auto mean = mean_trajectory(ensemble);

  std::vector<double> xs, ys;
  std::int64_t last = -1;
  constexpr int kPoints = 60;
  for (int i = 0; i < kPoints && f.sigma_low < n; ++i) {
    const double frac = static_cast<double>(i) / (kPoints - 1);
    const auto s = static_cast<std::int64_t>(
        std::llround(std::exp(std::log(static_cast<double>(f.sigma_low)) +
                              frac * std::log(static_cast<double>(n) / f.sigma_low))));
    if (s == last || s < 3 || s > n) continue;
    last = s;
    const double md = mean[s - tau];
    if (!(md > 0.0)) continue;
    xs.push_back(std::log(static_cast<double>(s) / tau));
    ys.push_back(std::log(md) - std::log(std::log(static_cast<double>(s))));
  }
  f.points = static_cast<int>(xs.size());
  std::vector<std::string> notes;
  if (ensemble.size() < 20) notes.push_back("fewer than 20 replicas");
  if (n < 10 * f.sigma_low) notes.push_back("fit window spans less than one decade");
  if (f.points < 3) notes.push_back("fewer than 3 usable points");
  if (f.points >= 3) {
    const double k = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    f.slope = sxy / sxx;
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - my - f.slope * (xs[i] - mx);
      sse += r * r;
    }
    f.stderr_ = std::sqrt(sse / (k - 2.0) / sxx);
    f.ci_low = f.slope - 1.96 * f.stderr_;
    f.ci_high = f.slope + 1.96 * f.stderr_;
  }
  f.sufficient = notes.empty();
  for (const auto& s : notes) f.note += (f.note.empty() ? "" : "; ") + s;
  return f;
}

void write_trajectory_csv(const CoupledRun& run, std::ostream& out) {
  out << "sigma,delta\n";
  for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
    out << run.tau + static_cast<std::int64_t>(i) << ',' << run.trajectory[i] << '\n';
  }
}

void to_json(nlohmann::json& j, const MismatchFit& f) {
  j = {{"slope", f.slope},         {"stderr", f.stderr_},       {"ci95", {f.ci_low, f.ci_high}},
       {"theory_a", f.theory_a},   {"sigma_low", f.sigma_low}, {"sigma_high", f.sigma_high},
       {"points", f.points},       {"sufficient", f.sufficient}, {"note", f.note}};
}

}  // namespace gpaf
