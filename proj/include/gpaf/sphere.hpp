#pragma once

#include <cmath>

#include "gpaf/rng.hpp"

namespace gpaf {

/// A position on the unit-area sphere, stored as a unit vector.
///
/// The sphere's physical radius 1/(2 sqrt(pi)) never enters: every kernel
/// and integral is expressed in the central angle between two positions.
struct SpherePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  /// Normalizes (x, y, z); throws std::invalid_argument for the zero vector.
  static SpherePoint from_vector(double x, double y, double z);

  static SpherePoint north_pole() noexcept { return {0.0, 0.0, 1.0}; }
  static SpherePoint south_pole() noexcept { return {0.0, 0.0, -1.0}; }

  double norm() const noexcept;
  double dot(const SpherePoint& other) const noexcept {
    return x * other.x + y * other.y + z * other.z;
  }

  friend bool operator==(const SpherePoint&, const SpherePoint&) = default;
};

/// Uniform position: z uniform on [-1, 1], azimuth uniform on [0, 2 pi).
SpherePoint sample_uniform(Rng& rng) noexcept;

/// Central angle between a and b, in [0, pi].
double angular_distance(const SpherePoint& a, const SpherePoint& b) noexcept;

/// Area fraction of a spherical cap of angular radius rho, (1 - cos rho)/2.
/// Throws std::domain_error unless 0 <= rho <= pi.
double cap_area(double rho);

/// sin^2(x/2), i.e. (1 - cos x)/2 without cancellation for small x.
inline double half_versine(double x) noexcept {
  const double s = std::sin(0.5 * x);
  return s * s;
}

}  // namespace gpaf
