#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace gpaf {

/// Raised when adaptive quadrature cannot reach the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  /// Error estimate reached before giving up.
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

/// Adaptive Simpson integration of f over [a, b].
///
/// The interval is first split at every breakpoint strictly inside (a, b),
/// so integrands with jumps at known locations converge on each smooth piece.
/// The absolute tolerance is shared among pieces in proportion to length.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, std::span<const double> breakpoints = {},
                           int max_depth = 48);

}  // namespace gpaf
