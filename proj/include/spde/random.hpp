#pragma once

// Counter-based Gaussian randomness. Every draw is a pure function of
// (base seed, replica, purpose, step, mode, component, slot), so results do
// not depend on evaluation order or thread count.

#include <array>
#include <cmath>
#include <cstdint>

#include "spde/spectral_field.hpp"

namespace spde {

/// Philox4x32-10 block function (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Separates independent families of draws sharing one seed and replica.
enum class StreamPurpose : std::uint8_t {
  kStationary = 1,
  kIncrement = 2,
  kInitialData = 3,
  kEnsembleW = 4,
  kEnsembleWTilde = 5,
  kEnsembleV = 6,
  kProbe = 7,
};

class NoiseStream {
 public:
  NoiseStream() = default;
  explicit NoiseStream(std::uint64_t base_seed, std::uint64_t replica = 0)
      : base_seed_(base_seed), replica_(replica) {
    const std::uint64_t k = splitmix64(base_seed ^ splitmix64(replica + 0x632BE59BD9B4E019ull));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t replica() const { return replica_; }

  NoiseStream for_replica(std::uint64_t replica) const { return NoiseStream(base_seed_, replica); }

  /// Two independent standard normals at the given derivation path.
  std::array<double, 2> normal_pair(StreamPurpose purpose, std::uint64_t step, std::uint32_t mode,
                                    std::uint32_t component, std::uint32_t slot) const {
    const Philox4x32::Counter ctr = {
        static_cast<std::uint32_t>(step),
        static_cast<std::uint32_t>((step >> 32) & 0x00FFFFFFu) |
            (static_cast<std::uint32_t>(purpose) << 24),
        mode, (component << 16) | (slot & 0xFFFFu)};
    const auto r = Philox4x32::apply(ctr, key_);
    // 53-bit uniforms in (0, 1].
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = kTwoPi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  /// Complex Gaussian with E|z|^2 = 1 (real and imaginary parts each 1/2).
  cplx complex_normal(StreamPurpose purpose, std::uint64_t step, std::uint32_t mode,
                      std::uint32_t component, std::uint32_t slot) const {
    const auto z = normal_pair(purpose, step, mode, component, slot);
    return {z[0] * kInvSqrt2, z[1] * kInvSqrt2};
  }

 private:
  static constexpr double kInvSqrt2 = 0.70710678118654752440;
  std::uint64_t base_seed_ = 0;
  std::uint64_t replica_ = 0;
  Philox4x32::Key key_{};
};

}  // namespace spde
