#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace gpaf {

struct Model;

/// Limiting degree law p_k for k in [m, k_max].
struct DegreeTable {
  int m = 1;
  std::vector<double> p;  // indexed by k; p[k] = 0 for k < m
  double deficit = 0.0;   // 1 - sum_k p_k, the mass beyond k_max

  double at(std::int64_t k) const {
    return k >= 0 && k < static_cast<std::int64_t>(p.size()) ? p[k] : 0.0;
  }
  std::int64_t k_max() const { return static_cast<std::int64_t>(p.size()) - 1; }
};

/// Degree of a newly inserted vertex when the normalizer sits on its floor:
/// m plus Binomial(m, 1 - 2/alpha) self-loops. Zero outside [m, 2m].
double selfloop_degree_pmf(int m, double alpha, std::int64_t k);

/// Solves p_k = [a (k-1+delta) p_{k-1} + s_k] / (1 + a (k+delta)) with
/// a = m/(alpha Theta), p_{m-1} = 0 and s_k the self-loop pmf.
/// Requires alpha > 2, delta > -m, k_max >= 2m.
DegreeTable limit_degree_distribution(int m, double alpha, double delta,
                                      std::int64_t k_max = 1'000'000);

/// 1 + alpha (1 + delta/(2m)).
double powerlaw_exponent(int m, double alpha, double delta);

/// a = m/(alpha Theta): growth exponent of an individual vertex's degree.
double degree_growth_exponent(int m, double alpha, double delta);

/// E[T(U)] = I_n (2m + delta) sigma.
double expected_total_attraction(const Model& model, std::int64_t sigma);

/// Deviation scale Theta I_n (sigma^{2/alpha} + sqrt(sigma) log sigma) log n.
double concentration_band(const Model& model, std::int64_t sigma);

struct TheoryPrediction {
  DegreeTable table;
  double tail_exponent;
  double expected_t_slope;  // I_n (2m + delta)
  std::vector<double> selfloop_pmf;  // indexed by k - m, k in [m, 2m]
  double degree_growth_a;
};

TheoryPrediction predict(const Model& model, std::int64_t k_max = 1'000'000);

/// "k,p_k" with header, k from m to k_max.
void write_theory_csv(const DegreeTable& table, std::ostream& out);

}  // namespace gpaf
