#pragma once

#include <cstddef>
#include <vector>

namespace gpaf {

/// Fenwick tree over non-negative weights: O(log n) point update, prefix sum
/// and weight-proportional search.
class WeightedIndex {
 public:
  WeightedIndex() = default;
  explicit WeightedIndex(std::size_t capacity) { reserve(capacity); }

  void reserve(std::size_t capacity);
  void clear();

  std::size_t size() const noexcept { return weights_.size(); }
  double total() const noexcept { return total_; }
  double weight(std::size_t i) const { return weights_.at(i); }

  /// Appends an item with the given weight.
  void push_back(double w);
  /// Adds delta to item i (the result must stay >= 0).
  void add(std::size_t i, double delta);
  void set(std::size_t i, double w) { add(i, w - weights_.at(i)); }

  /// Sum of weights of items [0, i).
  double prefix(std::size_t i) const;

  /// Smallest i with prefix(i + 1) > target, for 0 <= target < total();
  /// items of zero weight are never returned.
  std::size_t find(double target) const;

 private:
  std::vector<double> tree_;     // 1-based Fenwick array, tree_[0] unused
  std::vector<double> weights_;
  double total_ = 0.0;
};

}  // namespace gpaf
