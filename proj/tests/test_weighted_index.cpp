#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "gpaf/rng.hpp"
#include "gpaf/weighted_index.hpp"

using namespace gpaf;

namespace {

// Linear-scan oracle for find().
std::size_t scan_find(const std::vector<double>& w, double target) {
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (acc > target && w[i] > 0) return i;
  }
  return w.size();
}

}  // namespace

TEST_CASE("prefix sums and find agree with a linear scan") {
  Rng rng(1);
  WeightedIndex idx;
  std::vector<double> w;
  for (int i = 0; i < 300; ++i) {
    const double x = i % 7 == 0 ? 0.0 : static_cast<double>(rng.below(10) + 1);
    idx.push_back(x);
    w.push_back(x);
  }
  for (int round = 0; round < 200; ++round) {
    const auto i = rng.below(w.size());
    const double nw = static_cast<double>(rng.below(5));
    idx.set(i, nw);
    w[i] = nw;
    const auto j = rng.below(w.size() + 1);
    CHECK(idx.prefix(j) == std::accumulate(w.begin(), w.begin() + j, 0.0));
    CHECK(idx.total() == std::accumulate(w.begin(), w.end(), 0.0));
    // integer weights: every target between boundaries is exact
    const double t = std::floor(rng.uniform() * idx.total());
    CHECK(idx.find(t) == scan_find(w, t));
    CHECK(idx.weight(idx.find(t)) > 0.0);
  }
}

TEST_CASE("find never lands on zero weights at boundaries") {
  WeightedIndex idx;
  for (double x : {0.0, 2.0, 0.0, 0.0, 3.0, 0.0}) idx.push_back(x);
  CHECK(idx.find(0.0) == 1);
  CHECK(idx.find(1.999) == 1);
  CHECK(idx.find(2.0) == 4);
  CHECK(idx.find(4.999) == 4);
}

TEST_CASE("sampling frequencies follow the weights") {
  WeightedIndex idx;
  const std::vector<double> w = {1, 0, 3, 6, 0.5};
  for (double x : w) idx.push_back(x);
  Rng rng(9);
  std::vector<int> hits(w.size(), 0);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) ++hits[idx.find(rng.uniform() * idx.total())];
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p = w[i] / idx.total();
    const double sd = std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(hits[i] / static_cast<double>(draws) - p) <= 4 * sd + 1e-12);
  }
}
