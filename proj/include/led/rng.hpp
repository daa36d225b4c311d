// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace led {

/// Splittable 64-bit generator (splitmix64). One u64 of state; the same seed
/// produces the same stream on every platform. Consumers derive named
/// sub-streams so that adding draws in one module does not perturb another.
///
/// Derivation rule (documented so checkpoints stay portable):
///   stream(seed, name)  -> state = mix64(seed ^ fnv1a64(name))
///   substream(k)        -> state = mix64(state ^ mix64(k))
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  /// Named sub-stream of a root seed, e.g. Rng::stream(seed, "reparam-noise").
  static Rng stream(std::uint64_t root_seed, std::string_view name);

  /// Numbered fork of this stream's current state (does not advance *this).
  Rng substream(std::uint64_t k) const;

  std::uint64_t next_u64();

  /// Uniform on (0,1), both endpoints excluded (53-bit mantissa, offset half-ulp).
  double uniform();

  /// Standard normal via Box-Muller on two uniform draws; no cached spare,
  /// so the state is always exactly one u64.
  double normal();

  /// Uniform integer in [0, n), unbiased via threshold rejection.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Fisher-Yates shuffle, deterministic in the stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

  static std::uint64_t mix64(std::uint64_t z);
  static std::uint64_t fnv1a64(std::string_view s);

 private:
  std::uint64_t state_;
};

}  // namespace led
