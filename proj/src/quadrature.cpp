#include "gpaf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <vector>

namespace gpaf {
namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
};

class Simpson {
 public:
  explicit Simpson(const std::function<double(double)>& f, int max_depth)
      : f_(f), max_depth_(max_depth) {}

  double eval(double x) {
    ++evaluations_;
    return f_(x);
  }

  // Returns the refined value; accumulates the error estimate.
  double refine(const Panel& p, double tol, int depth) {
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * tol || depth >= max_depth_ || !(m > p.a && p.b > m)) {
      if (std::abs(delta) > 15.0 * tol) failed_ = true;
      error_ += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return refine({p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth + 1) +
           refine({m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth + 1);
  }

  double piece(double a, double b, double tol) {
    // One-sided limits: a jump sitting on a breakpoint belongs to one piece only.
    const double fa = eval(std::nextafter(a, b));
    const double fb = eval(std::nextafter(b, a));
    const double fm = eval(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return refine({a, b, fa, fm, fb, whole}, tol, 0);
  }

  const std::function<double(double)>& f_;
  int max_depth_;
  long evaluations_ = 0;
  double error_ = 0.0;
  bool failed_ = false;
};

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, std::span<const double> breakpoints,
                           int max_depth) {
  if (b == a) return {};
  if (b < a) {
    auto r = integrate(f, b, a, abs_tol, breakpoints, max_depth);
    r.value = -r.value;
    return r;
  }
  std::vector<double> cuts{a};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Simpson s(f, max_depth);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    // Each piece gets a share of the budget proportional to its length, but a
    // hair-thin piece still gets a usable tolerance.
    const double tol = std::max(abs_tol * len / (b - a), abs_tol * 1e-3);
    total += s.piece(cuts[i], cuts[i + 1], tol);
  }
  if (s.failed_ || !std::isfinite(total)) {
    std::ostringstream msg;
    msg << std::scientific << std::setprecision(3) << "adaptive Simpson did not converge to tolerance "
        << abs_tol << " (achieved " << s.error_ << ")";
    throw QuadratureError(msg.str(), s.error_);
  }
  return {total, s.error_, s.evaluations_};
}

}  // namespace gpaf
