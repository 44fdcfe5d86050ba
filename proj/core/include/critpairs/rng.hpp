#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace critpairs {

// Counter-based stream generator. Every trial owns an independent stream keyed
// by (master_seed, stream ids), so results do not depend on how trials are
// scheduled across workers.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on (0, 1]: never returns 0, so log() is always finite.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1p-53;
  }

  // Standard real normal via Box-Muller (one value per call; no cached spare,
  // which keeps streams position-independent).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Standard complex normal, E|a|^2 = 1.
  std::complex<double> complex_gaussian() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));  // sqrt(-2 ln u)/sqrt(2)
    return {r * std::cos(2.0 * std::numbers::pi * u2),
            r * std::sin(2.0 * std::numbers::pi * u2)};
  }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Stream for trial `index` of sub-experiment `tag` (e.g. tag = N).
inline CounterRng derive_stream(std::uint64_t master_seed, std::uint64_t tag,
                                std::uint64_t index) {
  std::uint64_t h = detail::mix64(master_seed);
  h = detail::mix64(h ^ detail::mix64(tag + 0x517cc1b727220a95ull));
  h = detail::mix64(h ^ detail::mix64(index + 0x2545f4914f6cdd1dull));
  return CounterRng(h);
}

}  // namespace critpairs
