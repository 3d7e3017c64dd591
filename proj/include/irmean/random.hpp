// Counter-based random numbers for reproducible simulations.
//
// Generator: Philox4x32-10 (Salmon et al., Random123). Key = the 64-bit
// seed split into (low, high) 32-bit words. Counter = (index low, index high,
// stream, 0), where index counts 128-bit blocks drawn from the stream.
// Each block yields two 64-bit words (x0 | x1 << 32, x2 | x3 << 32), consumed
// in order.
//
//   uniform  = (u64 >> 11) * 2^-53                      in [0, 1)
//   normal   = Box-Muller on two uniforms u1, u2:
//              r = sqrt(-2 log(1 - u1)), cos branch first, sin branch cached
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace irmean {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint64_t next_u64() {
    if (slot_ == 2) refill();
    return block_[slot_++];
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  void refill() {
    const auto out = philox4x32_10({static_cast<std::uint32_t>(index_),
                                    static_cast<std::uint32_t>(index_ >> 32), stream_, 0u},
                                   key_);
    block_[0] = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
    block_[1] = static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
    ++index_;
    slot_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
  std::uint64_t index_ = 0;
  std::array<std::uint64_t, 2> block_{};
  int slot_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace irmean
