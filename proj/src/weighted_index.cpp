#include "gpaf/weighted_index.hpp"

#include <bit>
#include <stdexcept>

namespace gpaf {

void WeightedIndex::reserve(std::size_t capacity) {
  tree_.reserve(capacity + 1);
  weights_.reserve(capacity);
}

void WeightedIndex::clear() {
  tree_.clear();
  weights_.clear();
  total_ = 0.0;
}

void WeightedIndex::push_back(double w) {
  if (!(w >= 0.0)) throw std::invalid_argument("WeightedIndex: weights must be >= 0");
  if (tree_.empty()) tree_.push_back(0.0);
  const std::size_t i = weights_.size() + 1;
  // A fresh Fenwick node i covers (i - lowbit(i), i]; fill it from prefixes.
  const std::size_t low = i & (~i + 1);
  double node = w;
  for (std::size_t j = i - 1; j > i - low; j -= j & (~j + 1)) node += tree_[j];
  tree_.push_back(node);
  weights_.push_back(w);
  total_ += w;
}

void WeightedIndex::add(std::size_t i, double delta) {
  if (i >= weights_.size()) throw std::out_of_range("WeightedIndex::add");
  weights_[i] += delta;
  total_ += delta;
  for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) tree_[j] += delta;
}

double WeightedIndex::prefix(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = i; j > 0; j -= j & (~j + 1)) s += tree_[j];
  return s;
}

std::size_t WeightedIndex::find(double target) const {
  const std::size_t n = weights_.size();
  if (n == 0) throw std::logic_error("WeightedIndex::find on empty index");
  std::size_t pos = 0;
  for (std::size_t step = std::bit_floor(n); step > 0; step >>= 1) {
    const std::size_t next = pos + step;
    if (next <= n && tree_[next] <= target) {
      pos = next;
      target -= tree_[next];
    }
  }
  // pos is the count of items whose cumulative weight is <= target. Rounding
  // can land on a zero-weight item or run off the end; step to a valid one.
  std::size_t i = pos < n ? pos : n - 1;
  while (i + 1 < n && weights_[i] <= 0.0) ++i;
  while (i > 0 && weights_[i] <= 0.0) --i;
  return i;
}

}  // namespace gpaf
