#pragma once

#include <cmath>
#include <cstdint>

namespace sdej {

// Stream roles keep the draws of one path statistically independent
// (jump clock vs. Brownian increments vs. experiment-level bookkeeping).
enum class StreamRole : std::uint64_t {
  jumps = 0x6a756d70,
  brownian = 0x62726f77,
  scratch = 0x73637261,
};

// Counter-based stream keyed by (global seed, path index, role).
// The output is a pure function of (key, counter), so results do not
// depend on the order in which paths are executed or on thread count.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t path_index, StreamRole role)
      : key_(mix(mix(mix(0x9e3779b97f4a7c15ull ^ seed) + path_index) +
                 static_cast<std::uint64_t>(role))) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ull); }

  // Uniform on (0,1), never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one spare is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Exponential with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sdej
