#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "gpaf/kernel.hpp"
#include "gpaf/quadrature.hpp"

using namespace gpaf;
constexpr double kPi = std::numbers::pi;

namespace {

// Independent oracle: composite midpoint rule for (1/2) int_0^b F(x) sin x dx.
double midpoint_half(const FitnessKernel& k, double b, int panels = 1'000'000) {
  const double h = b / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double x = (i + 0.5) * h;
    s += k.evaluate(x) * std::sin(x);
  }
  return 0.5 * s * h;
}

}  // namespace

TEST_CASE("quadrature: smooth, split and failing integrands") {
  auto r = integrate([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  const double bp[] = {1.0};
  auto step = integrate([](double x) { return x < 1.0 ? 1.0 : 3.0; }, 0.0, 2.0, 1e-12, bp);
  CHECK(step.value == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-14, {}, 6),
                  QuadratureError);
}

TEST_CASE("evaluate examples") {
  CHECK(FitnessKernel::constant().evaluate(1.3) == 1.0);
  const auto ind = FitnessKernel::range_indicator(0.1);
  CHECK(ind.evaluate(0.05) == 1.0);
  CHECK(ind.evaluate(0.2) == 0.0);
  CHECK(ind.evaluate(0.1) == 1.0);
  const auto pl = FitnessKernel::power_law(1.0, 0.25, 1e4);
  CHECK(pl.evaluate(0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(pl.evaluate(0.01) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(pl.max_value() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(ind.evaluate(-0.01), std::domain_error);
  CHECK_THROWS_AS(ind.evaluate(3.5), std::domain_error);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(FitnessKernel::range_indicator(0.0), std::invalid_argument);
  CHECK_THROWS_AS(FitnessKernel::range_indicator(4.0), std::invalid_argument);
  CHECK_THROWS_AS(FitnessKernel::power_law(2.0, 0.25, 100), std::invalid_argument);
  CHECK_THROWS_AS(FitnessKernel::power_law(-1.0, 0.25, 100), std::invalid_argument);
  CHECK_THROWS_AS(FitnessKernel::power_law(1.0, 0.5, 100), std::invalid_argument);
  CHECK_THROWS_AS(FitnessKernel::tabulated({{0.0, 1.0}, {0.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(FitnessKernel::tabulated({{0.0, -1.0}}), std::invalid_argument);
}

TEST_CASE("evaluate_cos agrees with evaluate") {
  const FitnessKernel ks[] = {FitnessKernel::constant(), FitnessKernel::range_indicator(0.7),
                              FitnessKernel::power_law(1.5, 0.3, 1e3),
                              FitnessKernel::tabulated({{0.0, 2.0}, {1.0, 1.0}, {3.0, 0.0}})};
  for (const auto& k : ks) {
    for (int i = 0; i <= 400; ++i) {
      const double u = kPi * i / 400.0;
      if (std::abs(u - 0.7) < 1e-9) continue;
      CHECK(k.evaluate_cos(std::cos(u)) == doctest::Approx(k.evaluate(u)).epsilon(1e-9));
    }
  }
}

TEST_CASE("monotone kernels are non-increasing on a grid") {
  const FitnessKernel ks[] = {FitnessKernel::constant(), FitnessKernel::range_indicator(0.4),
                              FitnessKernel::power_law(3.0, 0.2, 1e4)};
  for (const auto& k : ks) {
    double prev = k.evaluate(0.0);
    for (int i = 1; i <= 10000; ++i) {
      const double v = k.evaluate(kPi * i / 10000.0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("attractiveness integral: closed forms and midpoint oracle") {
  CHECK(attractiveness_integral(FitnessKernel::constant()) == doctest::Approx(1.0).epsilon(1e-14));
  const double ind = attractiveness_integral(FitnessKernel::range_indicator(0.1));
  CHECK(ind == doctest::Approx((1 - std::cos(0.1)) / 2).epsilon(1e-13));
  CHECK(std::abs(ind - 2.5e-3) < 3e-6);
  CHECK(ind == doctest::Approx(midpoint_half(FitnessKernel::range_indicator(0.1), 0.1)).epsilon(1e-9));

  const auto pl = FitnessKernel::power_law(1.0, 0.25, 1e4);
  CHECK(std::abs(attractiveness_integral(pl) - midpoint_half(pl, kPi)) < 1e-8);
  const auto pl3 = FitnessKernel::power_law(3.0, 0.2, 1e4);
  CHECK(std::abs(attractiveness_integral(pl3) - midpoint_half(pl3, kPi)) < 1e-8);
  const auto tab = FitnessKernel::tabulated({{0.0, 2.0}, {1.0, 1.0}, {3.0, 0.0}});
  CHECK(std::abs(attractiveness_integral(tab) - midpoint_half(tab, kPi)) < 1e-8);
}

TEST_CASE("partial integral examples and round trips") {
  const auto c = FitnessKernel::constant();
  CHECK(partial_integral(c, 0.0) == 0.0);
  CHECK(partial_integral(c, kPi / 2) == doctest::Approx(0.5).epsilon(1e-14));
  const auto ind = FitnessKernel::range_indicator(0.3);
  CHECK(partial_integral(ind, 0.3) == doctest::Approx(attractiveness_integral(ind)));
  CHECK(partial_integral(ind, 2.0) == doctest::Approx(attractiveness_integral(ind)));
  CHECK_THROWS_AS(partial_integral(c, -1.0), std::domain_error);

  const FitnessKernel ks[] = {c, ind, FitnessKernel::power_law(1.0, 0.25, 1e4),
                              FitnessKernel::power_law(3.0, 0.2, 1e4),
                              FitnessKernel::tabulated({{0.0, 2.0}, {1.0, 1.0}, {3.0, 0.0}})};
  for (const auto& k : ks) {
    const double i_n = attractiveness_integral(k);
    CHECK(std::abs(partial_integral(k, kPi) - i_n) < 1e-9);
    for (double mu : {0.01, 0.25, 0.5, 0.9, 1.0}) {
      const double rho = solve_rho(k, mu);
      CHECK(std::abs(partial_integral(k, rho) - mu * i_n) <= 1e-10);
    }
  }
  CHECK(solve_rho(c, 0.5) == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(solve_rho(c, 1.0) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(solve_rho(FitnessKernel::range_indicator(0.1), 1.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(solve_rho(c, 0.0), std::domain_error);
}

TEST_CASE("condition F") {
  const double n = 1e4;
  const auto cf = check_condition_F(FitnessKernel::constant(), n);
  // J = int F^2 sin = 2 and I = 1
  CHECK(cf.ratio == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(cf.theta_estimate == doctest::Approx(std::log(2.0) / std::log(n)).epsilon(1e-9));
  CHECK(cf.pass);

  const auto ind = FitnessKernel::range_indicator(0.05);
  const auto ci = check_condition_F(ind, n);
  CHECK(ci.j == doctest::Approx(2 * ci.i_n).epsilon(1e-9));
  CHECK(ci.ratio == doctest::Approx(2 / ci.i_n).epsilon(1e-9));

  const auto cp = check_condition_F(FitnessKernel::power_law(3.0, 0.2, n), n);
  CHECK(std::abs(cp.theta_estimate - 0.4) < 0.1);
}

TEST_CASE("smooth and tame conditions") {
  const double n = 1e4;
  const auto sc = check_smooth(FitnessKernel::constant(), n, 1.0, 1.0);
  CHECK(sc.s1_nonincreasing);
  CHECK(sc.rho_n == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(sc.s2_pass);
  CHECK(sc.c3 == doctest::Approx(kPi * kPi).epsilon(1e-10));
  CHECK(sc.s3_pass);

  const double r = std::pow(n, -0.4);
  const auto si = check_smooth(FitnessKernel::range_indicator(r), n, 0.25, 1.0);
  CHECK(si.rho_n == doctest::Approx(r / 2).epsilon(1e-3));
  CHECK(si.s2_pass == (n * si.rho_n * si.rho_n / std::log(n) >= 1.0));

  // 2 rho beyond the support: F(2 rho) = 0
  const auto sz = check_smooth(FitnessKernel::range_indicator(0.2), n, 0.9, 1.0);
  CHECK(2 * sz.rho_n > 0.2);
  CHECK(sz.c3 == 0.0);
  CHECK_FALSE(sz.s3_pass);

  const auto tc = check_tame(FitnessKernel::constant());
  CHECK(tc.c1 == 1.0);
  CHECK(tc.c2 == doctest::Approx(1.0));
  CHECK(tc.tame);
  const auto tp = check_tame(FitnessKernel::power_law(1.0, 0.25, 1e4));
  CHECK(tp.c1 >= 1 / kPi - 1e-12);
  CHECK(tp.tame);
  CHECK_FALSE(check_tame(FitnessKernel::range_indicator(1.0)).tame);
  CHECK(check_tame(FitnessKernel::range_indicator(1.0)).c1 == 0.0);
}

TEST_CASE("json round trip") {
  const FitnessKernel ks[] = {FitnessKernel::constant(), FitnessKernel::range_indicator(0.3),
                              FitnessKernel::power_law(1.5, 0.1, 500),
                              FitnessKernel::tabulated({{0.0, 2.0}, {1.0, 1.0}})};
  for (const auto& k : ks) {
    const nlohmann::json j = k;
    const auto back = j.get<FitnessKernel>();
    CHECK(nlohmann::json(back) == j);
    CHECK(back.evaluate(0.2) == k.evaluate(0.2));
  }
  CHECK_THROWS(nlohmann::json::parse(R"({"variant":"gaussian"})").get<FitnessKernel>());
  CHECK_THROWS(nlohmann::json::parse(R"({"variant":"power_law","beta":2,"psi":0.1,"n":10})")
                   .get<FitnessKernel>());
}
