#pragma once

#include <cstdint>
#include <vector>

namespace gpaf {

/// N_k: number of vertices of degree k at vertex count sigma.
struct DegreeHistogram {
  std::int64_t sigma = 0;
  std::vector<std::int64_t> counts;  // indexed by k; counts[k] = N_k

  std::int64_t count(std::int64_t k) const {
    return k >= 0 && k < static_cast<std::int64_t>(counts.size()) ? counts[k] : 0;
  }
  std::int64_t max_degree() const { return static_cast<std::int64_t>(counts.size()) - 1; }
  std::int64_t total() const;           // sum_k N_k
  std::int64_t degree_sum() const;      // sum_k k N_k
  void add(std::int64_t k, std::int64_t times = 1);
};

}  // namespace gpaf
