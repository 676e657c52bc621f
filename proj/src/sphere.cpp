#include "gpaf/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpaf {

SpherePoint SpherePoint::from_vector(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("SpherePoint: cannot normalize a zero or non-finite vector");
  }
  return {x / r, y / r, z / r};
}

double SpherePoint::norm() const noexcept { return std::sqrt(dot(*this)); }

SpherePoint sample_uniform(Rng& rng) noexcept {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

double angular_distance(const SpherePoint& a, const SpherePoint& b) noexcept {
  // atan2(|a x b|, a.b) keeps full precision near 0 and pi, where acos of a
  // clamped dot product loses about half the digits.
  const double cx = a.y * b.z - a.z * b.y;
  const double cy = a.z * b.x - a.x * b.z;
  const double cz = a.x * b.y - a.y * b.x;
  const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
  const double dot = std::clamp(a.dot(b), -1.0, 1.0);
  return std::clamp(std::atan2(cross, dot), 0.0, std::numbers::pi);
}

double cap_area(double rho) {
  if (!(rho >= 0.0 && rho <= std::numbers::pi)) {
    throw std::domain_error("cap_area: rho must lie in [0, pi]");
  }
  return half_versine(rho);
}

}  // namespace gpaf
