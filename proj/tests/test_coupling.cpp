#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "gpaf/coupling.hpp"
#include "gpaf/theory.hpp"

using namespace gpaf;

namespace {

ProcessParams params(int m, double alpha, double delta, FitnessKernel k, std::int64_t n,
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

double weight_sum(const std::vector<Ball>& b) {
  double s = 0;
  for (const auto& x : b) s += x.weight;
  return s;
}

UrnPair random_urns(Rng& rng) {
  // at most 6 balls in total
  for (;;) {
    const int nc = static_cast<int>(rng.below(3));
    const int nr = static_cast<int>(rng.below(3));
    const int nl = 1 + static_cast<int>(rng.below(2));
    std::vector<Ball> c, r, l;
    const BallColor cc[] = {BallColor::white, BallColor::red, BallColor::green};
    const BallColor rc[] = {BallColor::white, BallColor::purple, BallColor::blue};
    const BallColor lc[] = {BallColor::white, BallColor::orange};
    for (int i = 0; i < nc; ++i) c.push_back({cc[rng.below(3)], i, 0.1 + rng.uniform()});
    for (int i = 0; i < nr; ++i) r.push_back({rc[rng.below(3)], 10 + i, 0.1 + rng.uniform()});
    for (int i = 0; i < nl; ++i) l.push_back({lc[rng.below(2)], 20 + i, 0.1 + 2 * rng.uniform()});
    if (nc + nr == 0 || weight_sum(r) > weight_sum(l)) continue;
    return UrnPair::from_parts(c, r, l);
  }
}

// Law of ball numbers on each side, read off joint_law.
std::map<std::int64_t, double> side_law(const UrnPair& pair, bool hat) {
  std::map<std::int64_t, double> out;
  for (const auto& o : joint_law(pair)) out[pair.ball(hat ? o.ball_hat : o.ball).number] += o.probability;
  return out;
}

}  // namespace

TEST_CASE("urn validation") {
  CHECK_THROWS_AS(UrnPair::from_parts({{BallColor::purple, 0, 1.0}}, {}, {{BallColor::orange, 1, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(UrnPair::from_parts({}, {{BallColor::orange, 0, 1.0}}, {{BallColor::orange, 1, 2.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(UrnPair::from_parts({}, {}, {{BallColor::blue, 1, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(UrnPair::from_parts({{BallColor::red, 0, -1.0}}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(UrnPair::from_parts({}, {{BallColor::white, 0, 3.0}}, {{BallColor::white, 1, 2.0}}),
                  std::invalid_argument);
  CHECK_NOTHROW(UrnPair::from_parts({{BallColor::green, 0, 1.0}}, {{BallColor::blue, 0, 1.0}},
                                    {{BallColor::orange, 1, 1.5}}));
}

TEST_CASE("joint law: exhaustive enumeration on small urns") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const UrnPair pair = random_urns(rng);
    const double u = pair.u_norm(), hat = pair.hat_norm();
    const auto law = joint_law(pair);
    std::map<std::pair<int, std::size_t>, double> mu, mh;
    double total = 0, mism = 0;
    for (const auto& o : law) {
      mu[{static_cast<int>(o.ball.part), o.ball.index}] += o.probability;
      mh[{static_cast<int>(o.ball_hat.part), o.ball_hat.index}] += o.probability;
      total += o.probability;
      if (!(o.ball == o.ball_hat)) mism += o.probability;
      CHECK(o.ball_hat.part != UrnPart::only_u);
      CHECK(o.ball.part != UrnPart::only_hat);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(std::abs(mism - pair.mismatch_probability()) < 1e-12);
    CHECK(std::abs(mism - pair.only_hat_norm() / hat) < 1e-12);
    for (std::size_t i = 0; i < pair.common.size(); ++i) {
      CHECK(std::abs(mu[{0, i}] - pair.common[i].weight / u) < 1e-12);
      CHECK(std::abs(mh[{0, i}] - pair.common[i].weight / hat) < 1e-12);
    }
    for (std::size_t i = 0; i < pair.only_u.size(); ++i) {
      CHECK(std::abs(mu[{1, i}] - pair.only_u[i].weight / u) < 1e-12);
    }
    for (std::size_t i = 0; i < pair.only_hat.size(); ++i) {
      CHECK(std::abs(mh[{2, i}] - pair.only_hat[i].weight / hat) < 1e-12);
    }
  }
}

TEST_CASE("joint draw frequencies match the joint law") {
  Rng gen(5);
  for (int trial = 0; trial < 3; ++trial) {
    const UrnPair pair = random_urns(gen);
    const auto law = joint_law(pair);
    auto key = [](const BallRef& a, const BallRef& b) {
      return std::tuple{static_cast<int>(a.part), a.index, static_cast<int>(b.part), b.index};
    };
    std::map<std::tuple<int, std::size_t, int, std::size_t>, int> hits;
    Rng rng(100 + trial);
    const int draws = 1'000'000;
    int mism = 0;
    for (int i = 0; i < draws; ++i) {
      const auto d = joint_draw(pair, rng);
      ++hits[key(d.ball, d.ball_hat)];
      mism += d.mismatch();
    }
    std::size_t seen = 0;
    for (const auto& o : law) {
      const double p = o.probability;
      const int h = hits[key(o.ball, o.ball_hat)];
      seen += h > 0;
      CHECK(std::abs(h / double(draws) - p) <= 4 * std::sqrt(p * (1 - p) / draws));
    }
    CHECK(hits.size() == seen);  // nothing outside the support
    const double q = pair.mismatch_probability();
    CHECK(std::abs(mism / double(draws) - q) <= 4 * std::sqrt(q * (1 - q) / draws));
  }
}

TEST_CASE("urns built from two processes reproduce both attachment laws") {
  for (const auto& k : {FitnessKernel::constant(), FitnessKernel::range_indicator(1.0),
                        FitnessKernel::power_law(1.0, 0.25, 100)}) {
    for (double alpha : {1.5, 3.0, 5.0}) {
      const Model model(params(2, alpha, 0.5, k, 12, 3));
      CoupledProcess cp(model, 3, Rng(9));
      for (int s = 0; s < 6; ++s) cp.step();
      Rng probe(4);
      for (int j = 0; j < 4; ++j) {
        const auto x = sample_uniform(probe);
        const UrnPair pair = build_urns(cp.first(), cp.second(), x, 3, model);
        const GraphState& gu = pair.swapped ? cp.second() : cp.first();
        const GraphState& gh = pair.swapped ? cp.first() : cp.second();
        const auto lu = attachment_distribution(gu, x, model);
        const auto lh = attachment_distribution(gh, x, model);
        const double mu = normalizer(pair.t, gu.sigma(), alpha, model.theta, model.i_n);
        const double mh = normalizer(pair.t_hat, gh.sigma(), alpha, model.theta, model.i_n);
        CHECK(pair.t <= pair.t_hat);
        // weight identities
        CHECK(std::abs(pair.common_norm() + pair.only_u_norm() - mu) < 1e-9);
        CHECK(std::abs(pair.common_norm() + pair.only_hat_norm() - mh) < 1e-9);
        const auto su = side_law(pair, false);
        const auto sh = side_law(pair, true);
        for (std::size_t v = 0; v < lu.size(); ++v) {
          const auto fu = su.find(static_cast<std::int64_t>(v));
          const auto fh = sh.find(static_cast<std::int64_t>(v));
          CHECK(std::abs((fu == su.end() ? 0.0 : fu->second) - lu[v]) < 1e-12);
          CHECK(std::abs((fh == sh.end() ? 0.0 : fh->second) - lh[v]) < 1e-12);
        }
        CHECK(std::abs(pair.mismatch_probability() - pair.only_hat_norm() / mh) < 1e-12);

        // aggregated urns inside the coupled process agree
        const auto& p = cp.prepare(x);
        CHECK(p.swapped == pair.swapped);
        CHECK(std::abs(p.common - pair.common_norm()) < 1e-9);
        CHECK(std::abs(p.only_u - pair.only_u_norm()) < 1e-9);
        CHECK(std::abs(p.only_hat - pair.only_hat_norm()) < 1e-9);
        CHECK(std::abs(p.mismatch_probability - pair.mismatch_probability()) < 1e-12);
      }
    }
  }
}

TEST_CASE("aggregated coupled draws follow the ball-level joint law") {
  const Model model(params(2, 4.0, 0.0, FitnessKernel::range_indicator(1.5), 20, 8));
  CoupledProcess cp(model, 2, Rng(2));
  for (int s = 0; s < 8; ++s) cp.step();
  const auto x = SpherePoint::from_vector(0.2, 0.5, -0.4);
  const UrnPair pair = build_urns(cp.first(), cp.second(), x, 2, model);
  std::map<std::pair<std::int64_t, std::int64_t>, double> want;
  for (const auto& o : joint_law(pair)) {
    auto nu = pair.ball(o.ball).number, nh = pair.ball(o.ball_hat).number;
    if (pair.swapped) std::swap(nu, nh);
    want[{nu, nh}] += o.probability;
  }
  cp.prepare(x);
  Rng rng(3);
  const int draws = 400000;
  std::map<std::pair<std::int64_t, std::int64_t>, int> got;
  for (int i = 0; i < draws; ++i) {
    const auto d = cp.draw(rng);
    ++got[{d.head_first, d.head_second}];
  }
  for (const auto& [k, p] : want) {
    CHECK(std::abs(got[k] / double(draws) - p) <= 4 * std::sqrt(p * (1 - p) / draws) + 1e-12);
  }
  for (const auto& [k, c] : got) CHECK(want.contains(k));
}

TEST_CASE("build_urns rejects unrelated states") {
  const Model model(params(2, 3.0, 0.0, FitnessKernel::constant(), 20));
  CoupledProcess cp(model, 5, Rng(1));
  for (int s = 0; s < 5; ++s) cp.step();
  const auto x = SpherePoint::north_pole();
  CHECK_THROWS_AS(build_urns(cp.first(), cp.second(), x, 0, model), std::invalid_argument);
  CHECK_THROWS_AS(build_urns(cp.first(), cp.second(), x, 4, model), std::invalid_argument);
  const auto other = run(params(2, 3.0, 0.0, FitnessKernel::constant(), 10, 99)).state;
  CHECK_THROWS_AS(build_urns(cp.first(), other, x, 5, model), std::invalid_argument);
}

TEST_CASE("coupled runs: shared history, counting bound, conservation") {
  const Model model(params(2, 4.0, 0.0, FitnessKernel::range_indicator(0.8), 800, 21));
  const auto run = run_coupled(model, 50, 0, true);
  REQUIRE(run.first);
  REQUIRE(run.second);
  CHECK_FALSE(run.first->violation());
  CHECK_FALSE(run.second->violation());
  for (std::size_t i = 0; i < 49 * 2; ++i) CHECK(run.first->edges()[i] == run.second->edges()[i]);
  for (Vertex v = 0; v < 800; ++v) {
    if (v != 49) CHECK(run.first->position(v) == run.second->position(v));
  }
  CHECK(run.trajectory.size() == 751);
  CHECK(run.delta_at(50) == 0);
  for (std::size_t i = 1; i < run.trajectory.size(); ++i) {
    CHECK(run.trajectory[i] >= run.trajectory[i - 1]);
    CHECK(run.trajectory[i] <= 2 * static_cast<std::int64_t>(i + 1));
  }
  CHECK(run_coupled(model, 50, 0).trajectory == run.trajectory);
  CHECK(run_coupled(model, 50, 1).trajectory != run.trajectory);

  std::stringstream ss;
  write_trajectory_csv(run, ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "sigma,delta");
  std::getline(ss, line);
  CHECK(line == "50,0");
}

TEST_CASE("mismatch fit recovers a synthetic exponent") {
  const Model model(params(2, 4.0, 0.0, FitnessKernel::constant(), 100000));
  std::vector<CoupledRun> runs(20);
  for (auto& r : runs) {
    r.tau = 100;
    for (std::int64_t s = 100; s <= 100000; ++s) {
      r.trajectory.push_back(std::llround(1e6 * std::pow(s / 100.0, 0.3) * std::log(double(s))));
    }
  }
  const auto f = mismatch_growth_fit(runs, model);
  CHECK(f.sufficient);
  CHECK(f.sigma_low == 1000);
  CHECK(f.slope == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(f.theory_a == doctest::Approx(0.25));
  const auto few = mismatch_growth_fit(std::span(runs).first(3), model);
  CHECK_FALSE(few.sufficient);
}

TEST_CASE("mean mismatch grows sublinearly") {
  const Model model(params(2, 4.0, 0.0, FitnessKernel::constant(), 20000, 2));
  std::vector<CoupledRun> runs;
  for (int r = 0; r < 20; ++r) runs.push_back(run_coupled(model, 20, r));
  const auto f = mismatch_growth_fit(runs, model, 200);
  CHECK(f.points >= 3);
  CHECK(f.slope < 1.0);
  const auto mean = mean_trajectory(runs);
  for (std::size_t i = 1; i < mean.size(); ++i) CHECK(mean[i] >= mean[i - 1]);
}
