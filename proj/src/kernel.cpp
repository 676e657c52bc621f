#include "gpaf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gpaf/quadrature.hpp"
#include "gpaf/sphere.hpp"

namespace gpaf {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadTol = 1e-10;
constexpr int kGridPoints = 10000;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double tabulated_value(const kernels::Tabulated& t, double u) {
  const auto& k = t.knots;
  if (u <= k.front().first) return k.front().second;
  if (u >= k.back().first) return k.back().second;
  auto it = std::upper_bound(k.begin(), k.end(), u,
                             [](double x, const auto& knot) { return x < knot.first; });
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  const double t01 = (u - x0) / (x1 - x0);
  return y0 + t01 * (y1 - y0);
}

// (1/2) int_a^b g(x) sin x dx by quadrature, split at the kernel's breakpoints.
double half_sine_integral(const FitnessKernel& k, double a, double b, double tol,
                          bool squared) {
  const auto bp = k.breakpoints();
  auto integrand = [&](double x) {
    const double f = k.evaluate(std::clamp(x, 0.0, kPi));
    return 0.5 * (squared ? f * f : f) * std::sin(x);
  };
  return integrate(integrand, a, b, tol, bp).value;
}

}  // namespace

FitnessKernel::FitnessKernel(Variant v) : v_(std::move(v)) {
  std::visit(
      Overloaded{
          [&](const kernels::Constant&) { max_value_ = 1.0; },
          [&](const kernels::RangeIndicator& r) {
            if (!(r.radius > 0.0 && r.radius <= kPi)) {
              throw std::invalid_argument("RangeIndicator: radius must lie in (0, pi]");
            }
            max_value_ = 1.0;
            cos_radius_ = std::cos(r.radius);
          },
          [&](const kernels::PowerLaw& p) {
            if (!(p.beta > 0.0) || p.beta == 2.0) {
              throw std::invalid_argument("PowerLaw: beta must satisfy beta > 0 and beta != 2");
            }
            if (!(p.psi < 0.5)) {
              throw std::invalid_argument("PowerLaw: psi must satisfy psi < 1/2");
            }
            if (!(p.n >= 1.0) || !std::isfinite(p.n)) {
              throw std::invalid_argument("PowerLaw: n must be a finite number >= 1");
            }
            floor_ = std::pow(p.n, -p.psi);
            max_value_ = std::pow(floor_, -p.beta);
          },
          [&](const kernels::Tabulated& t) {
            if (t.knots.empty()) throw std::invalid_argument("Tabulated: needs at least one knot");
            double prev = -1.0;
            max_value_ = 0.0;
            for (const auto& [u, f] : t.knots) {
              if (!(u >= 0.0 && u <= kPi)) {
                throw std::invalid_argument("Tabulated: knot angles must lie in [0, pi]");
              }
              if (!(u > prev)) {
                throw std::invalid_argument("Tabulated: knot angles must be strictly increasing");
              }
              if (!(f >= 0.0) || !std::isfinite(f)) {
                throw std::invalid_argument("Tabulated: knot values must be finite and >= 0");
              }
              prev = u;
              max_value_ = std::max(max_value_, f);
            }
          },
      },
      v_);
}

std::string FitnessKernel::name() const {
  return std::visit(Overloaded{
                        [](const kernels::Constant&) { return std::string("constant"); },
                        [](const kernels::RangeIndicator&) { return std::string("range_indicator"); },
                        [](const kernels::PowerLaw&) { return std::string("power_law"); },
                        [](const kernels::Tabulated&) { return std::string("tabulated"); },
                    },
                    v_);
}

double FitnessKernel::evaluate(double u) const {
  if (!(u >= 0.0 && u <= kPi)) throw std::domain_error("FitnessKernel: u must lie in [0, pi]");
  return std::visit(Overloaded{
                        [](const kernels::Constant&) { return 1.0; },
                        [&](const kernels::RangeIndicator& r) { return u <= r.radius ? 1.0 : 0.0; },
                        [&](const kernels::PowerLaw& p) {
                          return std::pow(std::max(floor_, u), -p.beta);
                        },
                        [&](const kernels::Tabulated& t) { return tabulated_value(t, u); },
                    },
                    v_);
}

double FitnessKernel::evaluate_cos(double c) const noexcept {
  switch (v_.index()) {
    case 0:
      return 1.0;
    case 1:
      return c >= cos_radius_ ? 1.0 : 0.0;
    case 2: {
      const auto& p = std::get<kernels::PowerLaw>(v_);
      const double u = std::acos(std::clamp(c, -1.0, 1.0));
      return u <= floor_ ? max_value_ : std::pow(u, -p.beta);
    }
    default:
      return tabulated_value(std::get<kernels::Tabulated>(v_),
                             std::acos(std::clamp(c, -1.0, 1.0)));
  }
}

std::vector<double> FitnessKernel::breakpoints() const {
  std::vector<double> out;
  std::visit(Overloaded{
                 [](const kernels::Constant&) {},
                 [&](const kernels::RangeIndicator& r) { out.push_back(r.radius); },
                 [&](const kernels::PowerLaw&) { out.push_back(floor_); },
                 [&](const kernels::Tabulated& t) {
                   for (const auto& knot : t.knots) out.push_back(knot.first);
                 },
             },
             v_);
  std::erase_if(out, [](double x) { return !(x > 0.0 && x < kPi); });
  return out;
}

void to_json(nlohmann::json& j, const FitnessKernel& k) {
  std::visit(Overloaded{
                 [&](const kernels::Constant&) { j = {{"variant", "constant"}}; },
                 [&](const kernels::RangeIndicator& r) {
                   j = {{"variant", "range_indicator"}, {"r_n", r.radius}};
                 },
                 [&](const kernels::PowerLaw& p) {
                   j = {{"variant", "power_law"}, {"beta", p.beta}, {"psi", p.psi}, {"n", p.n}};
                 },
                 [&](const kernels::Tabulated& t) {
                   nlohmann::json knots = nlohmann::json::array();
                   for (const auto& [u, f] : t.knots) knots.push_back({u, f});
                   j = {{"variant", "tabulated"}, {"knots", knots}};
                 },
             },
             k.variant());
}

void from_json(const nlohmann::json& j, FitnessKernel& k) {
  const auto variant = j.at("variant").get<std::string>();
  if (variant == "constant") {
    k = FitnessKernel::constant();
  } else if (variant == "range_indicator") {
    k = FitnessKernel::range_indicator(j.at("r_n").get<double>());
  } else if (variant == "power_law") {
    k = FitnessKernel::power_law(j.at("beta").get<double>(), j.at("psi").get<double>(),
                                 j.at("n").get<double>());
  } else if (variant == "tabulated") {
    std::vector<std::pair<double, double>> knots;
    for (const auto& knot : j.at("knots")) {
      knots.emplace_back(knot.at(0).get<double>(), knot.at(1).get<double>());
    }
    k = FitnessKernel::tabulated(std::move(knots));
  } else {
    throw std::invalid_argument("unknown kernel variant '" + variant +
                                "' (expected constant, range_indicator, power_law or tabulated)");
  }
}

double partial_integral(const FitnessKernel& k, double rho) {
  if (!(rho >= 0.0 && rho <= kPi)) {
    throw std::domain_error("partial_integral: rho must lie in [0, pi]");
  }
  return std::visit(
      Overloaded{
          [&](const kernels::Constant&) { return half_versine(rho); },
          [&](const kernels::RangeIndicator& r) { return half_versine(std::min(rho, r.radius)); },
          [&](const kernels::PowerLaw& p) {
            const double h = std::pow(p.n, -p.psi);
            if (rho <= h || h >= kPi) return k.max_value() * half_versine(std::min(rho, kPi));
            const double flat = k.max_value() * half_versine(h);
            return flat + integrate([&](double x) { return 0.5 * std::pow(x, -p.beta) * std::sin(x); },
                                    h, rho, kQuadTol)
                              .value;
          },
          [&](const kernels::Tabulated&) { return half_sine_integral(k, 0.0, rho, kQuadTol, false); },
      },
      k.variant());
}

double attractiveness_integral(const FitnessKernel& k) { return partial_integral(k, kPi); }

double solve_rho(const FitnessKernel& k, double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::domain_error("solve_rho: mu must lie in (0, 1]");
  const double total = attractiveness_integral(k);
  if (!(total > 0.0)) throw std::invalid_argument("solve_rho: kernel is identically zero");
  // Beyond the last point where F is positive the partial integral is flat,
  // and near it rounding makes mu = 1 ill-posed; answer that case directly.
  const double end = std::visit(
      Overloaded{
          [](const kernels::RangeIndicator& r) { return r.radius; },
          [](const kernels::Tabulated& t) {
            if (t.knots.back().second > 0.0) return kPi;
            double e = t.knots.back().first;
            for (auto it = t.knots.rbegin(); it != t.knots.rend() && it->second == 0.0; ++it) {
              e = it->first;
            }
            return e;
          },
          [](const auto&) { return kPi; },
      },
      k.variant());
  if (mu == 1.0) return end;
  const double target = mu * total;
  // Invariant: partial(lo) < target <= partial(hi).
  double lo = 0.0;
  double hi = end;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(hi, 1e-300); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (partial_integral(k, mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

ConditionF check_condition_F(const FitnessKernel& k, double n) {
  if (!(n >= 2.0)) throw std::domain_error("check_condition_F: n must be >= 2");
  const double i_n = attractiveness_integral(k);
  const double j = std::visit(
      Overloaded{
          [&](const kernels::Constant&) { return 2.0; },
          [&](const kernels::RangeIndicator&) { return 2.0 * i_n; },
          [&](const kernels::PowerLaw& p) {
            const double h = std::pow(p.n, -p.psi);
            const double fmax2 = k.max_value() * k.max_value();
            if (h >= kPi) return fmax2 * 2.0;
            const double tol = std::max(kQuadTol, 1e-13 * fmax2);
            return fmax2 * 2.0 * half_versine(h) +
                   integrate([&](double x) { return std::pow(x, -2.0 * p.beta) * std::sin(x); }, h,
                             kPi, tol)
                       .value;
          },
          [&](const kernels::Tabulated&) {
            const double fmax2 = k.max_value() * k.max_value();
            return 2.0 * half_sine_integral(k, 0.0, kPi, std::max(kQuadTol, 1e-13 * fmax2), true);
          },
      },
      k.variant());
  ConditionF out{};
  out.j = j;
  out.i_n = i_n;
  out.ratio = j / (i_n * i_n);
  out.theta_estimate = std::log(out.ratio) / std::log(n);
  out.pass = out.theta_estimate < 1.0;
  return out;
}

SmoothReport check_smooth(const FitnessKernel& k, double n, double mu, double L, double c3_min) {
  if (!(n >= 2.0)) throw std::domain_error("check_smooth: n must be >= 2");
  SmoothReport r{};
  r.s1_nonincreasing = true;
  double prev = k.evaluate(0.0);
  for (int i = 1; i < kGridPoints; ++i) {
    const double f = k.evaluate(kPi * i / (kGridPoints - 1));
    if (f > prev) {
      r.s1_nonincreasing = false;
      break;
    }
    prev = f;
  }
  r.rho_n = solve_rho(k, mu);
  const double logn = std::log(n);
  r.s2_value = n * r.rho_n * r.rho_n / logn;
  r.s2_pass = r.s2_value >= L;
  // Distances never exceed pi, so F is read at min(2 rho, pi).
  const double i_n = attractiveness_integral(k);
  r.c3 = r.rho_n * r.rho_n * k.evaluate(std::min(2.0 * r.rho_n, kPi)) / i_n;
  r.s3_pass = r.c3 > c3_min;
  return r;
}

TameReport check_tame(const FitnessKernel& k) {
  TameReport r{};
  r.c1 = k.evaluate(0.0);
  for (int i = 1; i < kGridPoints; ++i) {
    r.c1 = std::min(r.c1, k.evaluate(kPi * i / (kGridPoints - 1)));
  }
  r.c2 = attractiveness_integral(k);
  r.tame = r.c1 > 0.0 && std::isfinite(r.c2);
  return r;
}

KernelReport kernel_report(const FitnessKernel& k, double n, double mu, double L,
                           double c3_min) {
  return {attractiveness_integral(k), mu, check_smooth(k, n, mu, L, c3_min), check_tame(k),
          check_condition_F(k, n)};
}

void to_json(nlohmann::json& j, const KernelReport& r) {
  j = {
      {"I_n", r.i_n},
      {"mu", r.mu},
      {"rho_n", r.smooth.rho_n},
      {"smooth",
       {{"S1", r.smooth.s1_nonincreasing},
        {"S2", r.smooth.s2_pass},
        {"S2_n_rho2_over_log_n", r.smooth.s2_value},
        {"S3", r.smooth.s3_pass},
        {"c3", r.smooth.c3}}},
      {"tame", {{"T1_C1", r.tame.c1}, {"T2_C2", r.tame.c2}, {"tame", r.tame.tame}}},
      {"condition_F",
       {{"J", r.condition_f.j},
        {"ratio", r.condition_f.ratio},
        {"theta_estimate", r.condition_f.theta_estimate},
        {"pass", r.condition_f.pass}}},
  };
}

}  // namespace gpaf
