#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace critpairs {

// Pairwise tree reduction with a fixed association order. Sums are identical
// for a given input sequence no matter how many workers produced it.
template <typename T>
T pairwise_sum(const std::vector<T>& v) {
  if (v.empty()) return T{};
  std::vector<T> level(v);
  while (level.size() > 1) {
    std::size_t half = level.size() / 2;
    std::vector<T> next;
    next.reserve(half + 1);
    for (std::size_t i = 0; i < half; ++i)
      next.push_back(level[2 * i] + level[2 * i + 1]);
    if (level.size() % 2 == 1) next.push_back(level.back());
    level.swap(next);
  }
  return level[0];
}

}  // namespace critpairs
