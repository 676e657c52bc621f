#include "gpaf/theory.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "gpaf/process.hpp"

namespace gpaf {

double selfloop_degree_pmf(int m, double alpha, std::int64_t k) {
  if (!(alpha > 2.0)) throw std::domain_error("selfloop_degree_pmf: requires alpha > 2");
  if (k < m || k > 2 * static_cast<std::int64_t>(m)) return 0.0;
  const auto j = static_cast<int>(k - m);
  const double p = 1.0 - 2.0 / alpha;
  const double q = 2.0 / alpha;
  const double log_choose = std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0);
  // Binomial(m, p) at j; the exponent on q is m - j = 2m - k.
  return std::exp(log_choose) * std::pow(p, j) * std::pow(q, m - j);
}

DegreeTable limit_degree_distribution(int m, double alpha, double delta, std::int64_t k_max) {
  if (m < 1) throw std::invalid_argument("limit_degree_distribution: m must be >= 1");
  if (!(alpha > 2.0)) throw std::invalid_argument("limit_degree_distribution: requires alpha > 2");
  if (!(delta > -m)) throw std::invalid_argument("limit_degree_distribution: requires delta > -m");
  if (k_max < 2 * static_cast<std::int64_t>(m)) {
    throw std::invalid_argument("limit_degree_distribution: k_max must be >= 2m");
  }
  const double theta = (2.0 * m + delta) / 2.0;
  const double a = m / (alpha * theta);
  DegreeTable t;
  t.m = m;
  t.p.assign(k_max + 1, 0.0);
  double prev = 0.0;
  double sum = 0.0;
  for (std::int64_t k = m; k <= k_max; ++k) {
    const double s = selfloop_degree_pmf(m, alpha, k);
    const double pk = (a * (static_cast<double>(k) - 1.0 + delta) * prev + s) /
                      (1.0 + a * (static_cast<double>(k) + delta));
    t.p[k] = pk;
    prev = pk;
  }
  // Sum smallest terms first.
  for (std::int64_t k = k_max; k >= m; --k) sum += t.p[k];
  t.deficit = 1.0 - sum;
  return t;
}

double powerlaw_exponent(int m, double alpha, double delta) {
  return 1.0 + alpha * (1.0 + delta / (2.0 * m));
}

double degree_growth_exponent(int m, double alpha, double delta) {
  return m / (alpha * (2.0 * m + delta) / 2.0);
}

double expected_total_attraction(const Model& model, std::int64_t sigma) {
  if (sigma < 0) throw std::domain_error("expected_total_attraction: sigma must be >= 0");
  return model.i_n * (2.0 * model.params.m + model.params.delta) * static_cast<double>(sigma);
}

double concentration_band(const Model& model, std::int64_t sigma) {
  if (!(model.params.alpha > 2.0)) throw std::domain_error("concentration_band: requires alpha > 2");
  if (sigma < 2) throw std::domain_error("concentration_band: requires sigma >= 2");
  const double s = static_cast<double>(sigma);
  const double n = static_cast<double>(std::max<std::int64_t>(model.params.n, 2));
  return model.theta * model.i_n *
         (std::pow(s, 2.0 / model.params.alpha) + std::sqrt(s) * std::log(s)) * std::log(n);
}

TheoryPrediction predict(const Model& model, std::int64_t k_max) {
  const auto& p = model.params;
  TheoryPrediction out{limit_degree_distribution(p.m, p.alpha, p.delta, k_max),
                       powerlaw_exponent(p.m, p.alpha, p.delta),
                       model.i_n * (2.0 * p.m + p.delta),
                       {},
                       degree_growth_exponent(p.m, p.alpha, p.delta)};
  for (int k = p.m; k <= 2 * p.m; ++k) out.selfloop_pmf.push_back(selfloop_degree_pmf(p.m, p.alpha, k));
  return out;
}

void write_theory_csv(const DegreeTable& table, std::ostream& out) {
  out << "k,p_k\n";
  out.precision(17);
  for (std::int64_t k = table.m; k <= table.k_max(); ++k) out << k << ',' << table.p[k] << '\n';
}

}  // namespace gpaf
