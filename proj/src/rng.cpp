#include "gpaf/rng.hpp"

namespace gpaf {

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  __uint128_t product = static_cast<__uint128_t>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<__uint128_t>((*this)()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

}  // namespace gpaf
