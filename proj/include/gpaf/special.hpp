#pragma once

namespace gpaf {

/// Hurwitz zeta function sum_{k>=0} (q + k)^{-s}, for s > 1 and q > 0.
double hurwitz_zeta(double s, double q);

/// Upper regularized incomplete gamma Q(a, x); the chi-square survival
/// function with k degrees of freedom is Q(k/2, x/2).
double gamma_q(double a, double x);

double chi_square_sf(double statistic, double dof);

/// Standard normal upper tail.
double normal_sf(double z);

}  // namespace gpaf
