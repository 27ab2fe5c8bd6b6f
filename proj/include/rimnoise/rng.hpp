#pragma once

// Counter-based random streams.
//
// Every stream is a Philox4x32-10 keyed by a 64-bit key and addressed by a
// 64-bit stream index; the remaining 64 counter bits count output blocks.
// Nothing is shared between streams, so any trajectory can be regenerated in
// isolation and in any order.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace rimnoise {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter encrypt(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Address of one random substream: a key plus a stream index.
///
/// `derive(tag)` produces a statistically unrelated child address by hashing
/// the tag into the key, which is how per-trajectory streams fan out into
/// per-fluctuator and per-measurement streams.
struct Seed {
  std::uint64_t key = 0;
  std::uint64_t stream = 0;

  [[nodiscard]] constexpr Seed derive(std::uint64_t tag) const {
    return Seed{splitmix64(key ^ splitmix64(tag + 0x632BE59BD9B4E019ull)), stream};
  }
  [[nodiscard]] constexpr Seed with_stream(std::uint64_t s) const { return Seed{key, s}; }

  friend constexpr bool operator==(const Seed&, const Seed&) = default;
};

/// Sequential generator over one substream. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(Seed seed) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (cursor_ == 2) refill();
    return buffer_[cursor_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; both variates of a pair are used.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) { return uniform() < p; }

  [[nodiscard]] const Seed& seed() const { return seed_; }

 private:
  void refill() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(seed_.stream),
                                  static_cast<std::uint32_t>(seed_.stream >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_.key),
                              static_cast<std::uint32_t>(seed_.key >> 32)};
    const auto out = Philox4x32::encrypt(ctr, key);
    buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    ++block_;
    cursor_ = 0;
  }

  Seed seed_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Tags used to fan a trajectory seed out into independent substreams.
namespace stream_tags {
inline constexpr std::uint64_t kNoise = 0x6E6F697365ull;        // "noise"
inline constexpr std::uint64_t kMeasurement = 0x6D65617375ull;  // "measu"
inline constexpr std::uint64_t kQuadratic = 0x7175616472ull;    // "quadr"
}  // namespace stream_tags

}  // namespace rimnoise
