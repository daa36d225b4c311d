// SPDX-License-Identifier: Apache-2.0
#include "led/rng.hpp"

#include <cmath>

namespace led {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
}

std::uint64_t Rng::mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

std::uint64_t Rng::fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Rng Rng::stream(std::uint64_t root_seed, std::string_view name) {
  return Rng(mix64(root_seed ^ fnv1a64(name)));
}

Rng Rng::substream(std::uint64_t k) const {
  return Rng(mix64(state_ ^ mix64(k)));
}

std::uint64_t Rng::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double Rng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  std::uint64_t bound = ~0ull - ~0ull % n;
  std::uint64_t v = next_u64();
  while (v >= bound) v = next_u64();
  return v % n;
}

}  // namespace led
