#pragma once

// Splittable deterministic generator: xoshiro256** seeded through splitmix64.
// A state is identified by (seed, stream); substream(id) derives a child
// without advancing the parent, so work split across threads or across
// left-nodes draws the same numbers regardless of scheduling.

#include <cmath>
#include <cstdint>
#include <limits>

namespace dirmech {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t& s) noexcept {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t mix64(std::uint64_t v) noexcept {
  std::uint64_t s = v;
  return splitmix64(s);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class RngState {
 public:
  using result_type = std::uint64_t;

  explicit RngState(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {
    std::uint64_t sm = detail::mix64(seed) ^ detail::mix64(stream ^ 0xD1B54A32D192ED03ULL);
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Child generator for `id`; does not consume state of *this.
  RngState substream(std::uint64_t id) const noexcept {
    std::uint64_t h = stream_;
    h = detail::mix64(h ^ detail::mix64(id + 0x632BE59BD9B4E019ULL));
    return RngState(seed_, h);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); safe to take the log of.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exp(1) variate.
  double exponential() noexcept { return -std::log(uniform_open()); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t s_[4];
};

}  // namespace dirmech
