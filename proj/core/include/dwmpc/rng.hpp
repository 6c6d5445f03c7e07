#pragma once

#include <cmath>
#include <cstdint>

namespace dwmpc {

/// Deterministic random stream (SplitMix64) with a fixed-draw-count normal
/// generator. Unlike std::normal_distribution this consumes exactly two
/// uniforms per normal, so draw order is reproducible across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1].
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via the trigonometric Box-Muller transform.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Derives an independent child stream; does not advance this stream.
  Rng fork(std::uint64_t stream_id) const {
    Rng child(state_ ^ (0xD1B54A32D192ED03ULL * (stream_id + 1)));
    child.next_u64();
    return child;
  }

 private:
  std::uint64_t state_;
};

}  // namespace dwmpc
