#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "gpaf/process.hpp"
#include "gpaf/theory.hpp"

using namespace gpaf;

namespace {

ProcessParams params(int m, double alpha, double delta, FitnessKernel k, std::int64_t n = 10,
                     std::uint64_t seed = 1) {
  ProcessParams p;
  p.n = n;
  p.m = m;
  p.alpha = alpha;
  p.delta = delta;
  p.kernel = std::move(k);
  p.seed = seed;
  return p;
}

// Straight from the definition, no block sums.
std::vector<double> law_oracle(const GraphState& s, const SpherePoint& u, const Model& model) {
  const auto& p = model.params;
  std::vector<double> w(s.sigma() + 1, 0.0);
  double t = 0.0;
  for (std::int64_t v = 0; v < s.sigma(); ++v) {
    w[v] = (s.degree(v) + p.delta) * p.kernel.evaluate(angular_distance(s.position(v), u));
    t += w[v];
  }
  const double m = std::max(t, p.alpha * model.theta * model.i_n * s.sigma());
  for (std::int64_t v = 0; v < s.sigma(); ++v) w[v] /= m;
  w.back() = 1.0 - t / m;
  return w;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d / 2;
}

const FitnessKernel kKernels[] = {
    FitnessKernel::constant(), FitnessKernel::range_indicator(1.2),
    FitnessKernel::power_law(1.0, 0.25, 1e4), FitnessKernel::power_law(3.0, 0.2, 1e4),
    FitnessKernel::tabulated({{0.0, 2.0}, {1.5, 0.5}, {3.0, 0.1}})};

}  // namespace

TEST_CASE("params validation") {
  auto p = params(2, 3, 0, FitnessKernel::constant());
  CHECK_NOTHROW(p.validate());
  CHECK(p.theta() == 2.0);
  p.delta = -2;
  try {
    p.validate();
    FAIL("accepted delta = -m");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("δ > −m") != std::string::npos);
  }
  p.delta = 0;
  p.alpha = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.alpha = 2;
  CHECK(p.warnings().size() == 1);
  p.n = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("first vertex convention and n = 1") {
  auto res = run(params(3, 3, 0.5, FitnessKernel::constant(), 1));
  CHECK(res.state.sigma() == 1);
  CHECK(res.state.degree(0) == 6);
  CHECK(res.state.self_loop_count() == 3);
  CHECK_FALSE(res.state.violation());
}

TEST_CASE("total attraction and normalizer") {
  const Model model(params(2, 3, 0.5, FitnessKernel::constant(), 50));
  GraphState empty(2, 0.5);
  CHECK(total_attraction(empty, SpherePoint::north_pole(), model.params.kernel, 0.5) == 0.0);
  CHECK(normalizer(0.0, 0, 3, 2.25, 1) == 0.0);
  CHECK(normalizer(0.0, 5, 3, 2.25, 1) == doctest::Approx(3 * 2.25 * 5));

  auto res = run(model);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const double t = total_attraction(res.state, sample_uniform(rng), model.params.kernel, 0.5);
    CHECK(t == doctest::Approx((2 * 2 + 0.5) * 50).epsilon(1e-13));
  }
  // single vertex out of range of an indicator
  GraphState one(2, 0.0);
  const Vertex loops[] = {0, 0};
  one.add_vertex(SpherePoint::north_pole(), loops);
  CHECK(total_attraction(one, SpherePoint::south_pole(), FitnessKernel::range_indicator(0.5), 0.0) ==
        0.0);
  const Model ind(params(2, 3, 0.0, FitnessKernel::range_indicator(0.5)));
  const auto law = attachment_distribution(one, SpherePoint::south_pole(), ind);
  CHECK(law.back() == 1.0);
}

TEST_CASE("attachment distribution: reduction to degree-proportional and alpha = 4") {
  const Model parid(params(3, 2, 1, FitnessKernel::constant(), 200));
  auto res = run(parid);
  Rng rng(8);
  const auto u = sample_uniform(rng);
  const auto law = attachment_distribution(res.state, u, parid);
  CHECK(law.back() == 0.0);
  for (std::int64_t v = 0; v < res.state.sigma(); ++v) {
    CHECK(std::abs(law[v] - (res.state.degree(v) + 1.0) / (7.0 * 200)) < 1e-12);
  }
  CHECK(res.state.self_loop_count() == 3);  // only the first vertex

  const Model four(params(2, 4, 0, FitnessKernel::constant(), 100));
  auto r4 = run(four);
  const auto l4 = attachment_distribution(r4.state, u, four);
  CHECK(l4.back() == doctest::Approx(0.5).epsilon(1e-13));
  const double m = normalizer(total_attraction(r4.state, u, four.params.kernel, 0), 100, 4,
                              four.theta, four.i_n);
  CHECK(m == doctest::Approx(4 * 2 * 100));
}

TEST_CASE("attachment distribution matches a direct oracle and sums to one") {
  for (const auto& k : kKernels) {
    for (double alpha : {1.5, 3.0, 6.0}) {
      const Model model(params(2, alpha, -0.5, k, 40, 17));
      Process proc(model, Rng(5));
      Rng probe(99);
      for (int s = 0; s < 40; ++s) {
        proc.step();
        const auto u = sample_uniform(probe);
        const auto law = attachment_distribution(proc.state(), u, model);
        const auto oracle = law_oracle(proc.state(), u, model);
        CHECK(tv_distance(law, oracle) < 1e-12);
        CHECK(std::abs(std::accumulate(law.begin(), law.end(), 0.0) - 1.0) < 1e-12);
        for (double p : law) CHECK(p >= 0.0);
      }
    }
  }
}

TEST_CASE("fast sampler law equals the attachment distribution") {
  for (const auto& k : kKernels) {
    const Model model(params(2, 3.0, 0.5, k, 10, 4));
    Process proc(model, Rng(21));
    FastSampler fast(model, 0.0);
    Rng probe(7);
    for (int s = 0; s < 10; ++s) {
      proc.step();
      fast.attach(proc.state());
      for (int j = 0; j < 5; ++j) {
        const auto u = sample_uniform(probe);
        CHECK(tv_distance(fast.law(proc.state(), u), attachment_distribution(proc.state(), u, model)) <
              1e-12);
      }
    }
  }
}

TEST_CASE("sampled endpoints match the law: exact and fast") {
  const int draws = 1'000'000;
  for (const auto& k : {FitnessKernel::power_law(1.0, 0.25, 1e4), FitnessKernel::range_indicator(1.5)}) {
    const Model model(params(2, 3.0, 0.0, k, 3, 12));
    auto res = run(model);
    const auto u = SpherePoint::from_vector(0.3, -0.2, 0.9);
    const auto law = attachment_distribution(res.state, u, model);

    ExactSampler exact;
    const double t = exact.prepare(res.state, u, model.params.kernel);
    const double m = normalizer(t, 3, model.params.alpha, model.theta, model.i_n);
    FastSampler fast(model, 0.0);
    fast.attach(res.state);
    fast.prepare(res.state, u);
    Rng rng(77);
    std::vector<int> he(law.size(), 0), hf(law.size(), 0);
    for (int i = 0; i < draws; ++i) {
      ++he[exact.sample(res.state, u, model.params.kernel, m, rng)];
      ++hf[fast.sample(res.state, u, rng)];
    }
    for (std::size_t v = 0; v < law.size(); ++v) {
      const double sd = std::sqrt(law[v] * (1 - law[v]) / draws);
      CHECK(std::abs(he[v] / double(draws) - law[v]) <= 4 * sd + 1e-12);
      CHECK(std::abs(hf[v] / double(draws) - law[v]) <= 4 * sd + 1e-12);
    }
  }
}

TEST_CASE("fast sampler falls back on tiny acceptance") {
  const Model tiny(params(2, 3, 0, FitnessKernel::range_indicator(0.01), 100));
  FastSampler f(tiny, 0.01);
  CHECK(f.uses_fallback());
  const Model wide(params(2, 3, 0, FitnessKernel::constant(), 100));
  FastSampler g(wide, 0.01);
  CHECK_FALSE(g.uses_fallback());
  CHECK(g.expected_acceptance() == 1.0);
  // the fallback run is still a valid run
  RunOptions opt;
  opt.sampler = SamplerKind::fast;
  auto res = run(tiny, opt);
  CHECK_FALSE(res.state.violation());
}

TEST_CASE("conservation after every step") {
  for (const auto& k : kKernels) {
    for (SamplerKind sk : {SamplerKind::exact, SamplerKind::fast}) {
      const Model model(params(3, 2.5, -1.5, k, 300, 5));
      Process proc(model, Rng(1), sk);
      for (int s = 0; s < 300; ++s) {
        proc.step();
        const auto& st = proc.state();
        std::int64_t sum = 0;
        for (auto d : st.degrees()) sum += d;
        REQUIRE(sum == 2 * 3 * st.sigma());
        REQUIRE(st.edges().size() == static_cast<std::size_t>(3 * st.sigma()));
      }
      CHECK_FALSE(proc.state().violation());
      const auto h = degree_histogram(proc.state());
      CHECK(h.total() == 300);
      CHECK(h.degree_sum() == 2 * 3 * 300);
    }
  }
}

TEST_CASE("alpha <= 2 with the constant kernel never self-loops after the first vertex") {
  const Model model(params(2, 1.5, 0.0, FitnessKernel::constant(), 2000));
  CHECK(run(model).state.self_loop_count() == 2);
}

TEST_CASE("determinism, snapshots and replicas") {
  const Model model(params(2, 3, 0, FitnessKernel::range_indicator(0.8), 1000, 33));
  RunOptions opt;
  opt.snapshot_times = {10, 500, 1000};
  opt.t_samples = 5;
  auto a = run(model, opt);
  auto b = run(model, opt);
  CHECK(a.state == b.state);
  REQUIRE(a.snapshots.size() == 3);
  CHECK(a.snapshots[1].sigma == 500);
  CHECK(a.snapshots[1].histogram.total() == 500);
  CHECK(a.snapshots[2].t_samples.size() == 5);
  opt.t_samples = 0;
  CHECK(run(model, opt).state == a.state);  // probes use their own stream
  opt.replica = 1;
  CHECK_FALSE(run(model, opt).state == a.state);
  opt.snapshot_times = {500, 10};
  CHECK_THROWS_AS(run(model, opt), std::invalid_argument);
}

TEST_CASE("memory limit is enforced") {
  RunOptions opt;
  opt.memory_limit_bytes = 1000;
  CHECK_THROWS_AS(run(params(2, 3, 0, FitnessKernel::constant(), 10000), opt), std::length_error);
}

TEST_CASE("edge list and positions round trip") {
  auto res = run(params(3, 3, 0, FitnessKernel::constant(), 200, 9));
  std::stringstream ss;
  write_edges_tsv(res.state, ss);
  const std::string text = ss.str();
  CHECK(text.rfind("src\thead\n", 0) == 0);
  const auto back = read_edges_tsv(ss, 0, 0.0);
  CHECK(back.m() == 3);
  CHECK(std::vector<Edge>(back.edges().begin(), back.edges().end()) ==
        std::vector<Edge>(res.state.edges().begin(), res.state.edges().end()));
  CHECK(std::vector<std::int64_t>(back.degrees().begin(), back.degrees().end()) ==
        std::vector<std::int64_t>(res.state.degrees().begin(), res.state.degrees().end()));
  std::stringstream bad("src\thead\n1\t1\n2\t9\n");
  CHECK_THROWS(read_edges_tsv(bad, 1, 0.0));

  std::stringstream pos;
  write_positions_csv(res.state, pos);
  std::string header;
  std::getline(pos, header);
  CHECK(header == "vertex,x,y,z");
  int rows = 0;
  for (std::string line; std::getline(pos, line);) ++rows;
  CHECK(rows == 200);
  const auto man = run_manifest(params(3, 3, 0, FitnessKernel::constant(), 200, 9));
  CHECK(man.at("version") == kVersion);
  CHECK(man.at("params").get<ProcessParams>().seed == 9);
}

TEST_CASE("mean of T at a uniform point") {
  const Model model(params(2, 3, 1, FitnessKernel::range_indicator(0.5), 300, 2));
  const int reps = 300;
  double s = 0, ss = 0;
  for (int r = 0; r < reps; ++r) {
    RunOptions opt;
    opt.replica = r;
    opt.snapshot_times = {300};
    opt.t_samples = 1;
    const double t = run(model, opt).snapshots[0].t_samples[0];
    s += t;
    ss += t * t;
  }
  const double mean = s / reps;
  const double se = std::sqrt((ss / reps - mean * mean) / (reps - 1));
  CHECK(std::abs(mean - expected_total_attraction(model, 300)) < 4 * se);
}
