#pragma once

// Counter-based random streams (Philox4x32-10).
//
// Every Monte Carlo sample draws from its own substream addressed by
// (seed, stream tag, sample index), so the value of sample i never depends
// on which worker thread evaluated it or in which order.

#include <array>
#include <cstdint>
#include <string_view>

namespace stochgraph {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr int kRounds = 10;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int r = 0; r < kRounds; ++r) {
      ctr = round(ctr, key);
      key[0] += kWeylA;
      key[1] += kWeylB;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static Counter round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// 32-bit FNV-1a, used to turn term names into stream tags.
constexpr std::uint32_t stream_tag(std::string_view name) noexcept {
  std::uint32_t h = 2166136261u;
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 16777619u;
  }
  return h;
}

/// Identifies one family of substreams: a run seed plus a term tag.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t tag = 0;
};

/// Sequential uniform draws from substream (seed, tag, index).
class Substream {
 public:
  Substream(StreamKey key, std::uint64_t index) noexcept
      : key_{static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)},
        ctr_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), key.tag, 0u} {}

  std::uint32_t next_u32() noexcept {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift with rejection.
    while (true) {
      const std::uint64_t x = next_u64();
      const unsigned __int128 prod = static_cast<unsigned __int128>(x) * bound;
      const auto low = static_cast<std::uint64_t>(prod);
      if (low >= bound || low >= (-bound) % bound) return static_cast<std::uint64_t>(prod >> 64);
    }
  }

 private:
  void refill() noexcept {
    block_ = Philox4x32::generate(ctr_, key_);
    ++ctr_[3];
    pos_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int pos_ = 4;
};

}  // namespace stochgraph
