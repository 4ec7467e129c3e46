#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is drawn from a stream identified by
// the triple (seed, sample_index, stream_tag). The generator is Philox4x32-10
// (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC'11):
//
//   key     = (seed & 0xffffffff, seed >> 32)
//   counter = (block, stream_tag, sample_index & 0xffffffff, sample_index >> 32)
//
// where `block` increments once per four 32-bit outputs. Uniform doubles take
// the top 53 bits of two consecutive outputs (first output = high word) and
// are shifted by half an ulp so they lie strictly inside (0, 1). Normals use
// the Box-Muller transform on consecutive uniform pairs, cosine branch first.
// Identical keys give identical streams on every platform with IEEE doubles
// and a correctly rounded libm.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace nodal {

/// Tags separating independent streams of one sample.
enum class StreamTag : std::uint32_t {
  kPlaneWaves = 1,
  kSphereCoefficients = 2,
  kBootstrap = 3,
  kTest = 4,
  kTreeSampling = 5,
};

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// One Philox4x32-10 block.
constexpr PhiloxBlock philox4x32(PhiloxBlock counter, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * counter[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * counter[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

class RandomStream {
public:
  RandomStream(std::uint64_t seed, std::uint64_t sample_index, StreamTag tag)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        sample_index_(sample_index),
        tag_(static_cast<std::uint32_t>(tag)) {}

  std::uint32_t next_u32() {
    if (used_ == 4) refill();
    return buffer_[used_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n > 0. Lemire-style rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  void refill() {
    buffer_ = philox4x32({block_++, tag_, static_cast<std::uint32_t>(sample_index_),
                          static_cast<std::uint32_t>(sample_index_ >> 32)},
                         key_);
    used_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t sample_index_;
  std::uint32_t tag_;
  std::uint32_t block_ = 0;
  PhiloxBlock buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nodal
