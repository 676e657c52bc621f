#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace gpaf {

namespace kernels {

/// F(u) = 1.
struct Constant {};

/// F(u) = 1{u <= radius}.
struct RangeIndicator {
  double radius;
};

/// F(u) = max(n^-psi, u)^-beta, with beta > 0, beta != 2, psi < 1/2.
struct PowerLaw {
  double beta;
  double psi;
  double n;
};

/// Piecewise-linear through (angle, value) knots; clamped outside them.
struct Tabulated {
  std::vector<std::pair<double, double>> knots;
};

}  // namespace kernels

/// The fitness kernel F_n: a non-negative weight as a function of the central
/// angle between a vertex and the newcomer. Immutable after construction.
class FitnessKernel {
 public:
  using Variant = std::variant<kernels::Constant, kernels::RangeIndicator, kernels::PowerLaw,
                               kernels::Tabulated>;

  FitnessKernel() : FitnessKernel(kernels::Constant{}) {}
  /// Validates parameter ranges; throws std::invalid_argument.
  explicit FitnessKernel(Variant v);

  static FitnessKernel constant() { return FitnessKernel(kernels::Constant{}); }
  static FitnessKernel range_indicator(double radius) {
    return FitnessKernel(kernels::RangeIndicator{radius});
  }
  static FitnessKernel power_law(double beta, double psi, double n) {
    return FitnessKernel(kernels::PowerLaw{beta, psi, n});
  }
  static FitnessKernel tabulated(std::vector<std::pair<double, double>> knots) {
    return FitnessKernel(kernels::Tabulated{std::move(knots)});
  }

  const Variant& variant() const noexcept { return v_; }
  bool is_constant() const noexcept { return std::holds_alternative<kernels::Constant>(v_); }
  std::string name() const;

  /// F(u) for u in [0, pi]; throws std::domain_error otherwise.
  double evaluate(double u) const;

  /// F(acos(c)) for a dot product c of two unit vectors. Hot path of the
  /// samplers: the indicator compares c against cos(radius) directly.
  double evaluate_cos(double c) const noexcept;

  /// sup over [0, pi] of F.
  double max_value() const noexcept { return max_value_; }

  /// Points in (0, pi) where F may jump or kink.
  std::vector<double> breakpoints() const;

  /// Cosine threshold for RangeIndicator (F = 1 iff dot >= threshold).
  double cos_radius() const noexcept { return cos_radius_; }

 private:
  Variant v_;
  double max_value_ = 1.0;
  double cos_radius_ = -1.0;
  double floor_ = 0.0;  // n^-psi for PowerLaw
};

void to_json(nlohmann::json& j, const FitnessKernel& k);
void from_json(const nlohmann::json& j, FitnessKernel& k);

/// I_n = (1/2) int_0^pi F(x) sin x dx.
double attractiveness_integral(const FitnessKernel& k);

/// (1/2) int_0^rho F(x) sin x dx, for 0 <= rho <= pi.
double partial_integral(const FitnessKernel& k, double rho);

/// Smallest rho with partial_integral(rho) >= mu * I_n, mu in (0, 1].
double solve_rho(const FitnessKernel& k, double mu);

struct ConditionF {
  double j;              // int_0^pi F^2 sin x dx
  double i_n;
  double ratio;          // j / I_n^2
  double theta_estimate; // log(ratio) / log(n)
  bool pass;             // theta_estimate < 1
};

/// Measures int F^2 sin = O(n^theta I_n^2) at a given n >= 2.
ConditionF check_condition_F(const FitnessKernel& k, double n);

struct SmoothReport {
  double rho_n;
  bool s1_nonincreasing;
  double s2_value;  // n rho_n^2 / log n, compared to L
  bool s2_pass;
  double c3;        // rho_n^2 F(2 rho_n) / I_n
  bool s3_pass;
};

/// Smoothness conditions S1-S3 for interaction radius rho_n at mass fraction mu.
/// S1 samples monotonicity on a 10^4-point grid. S3 passes when c3 > c3_min.
SmoothReport check_smooth(const FitnessKernel& k, double n, double mu, double L,
                          double c3_min = 0.0);

struct TameReport {
  double c1;  // min over grid of F
  double c2;  // I_n
  bool tame;
};

TameReport check_tame(const FitnessKernel& k);

struct KernelReport {
  double i_n;
  double mu;
  SmoothReport smooth;
  TameReport tame;
  ConditionF condition_f;
};

KernelReport kernel_report(const FitnessKernel& k, double n, double mu, double L,
                           double c3_min = 0.0);

void to_json(nlohmann::json& j, const KernelReport& r);

}  // namespace gpaf
