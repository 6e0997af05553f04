#pragma once

#include <cmath>
#include <cstdint>

namespace otb {

/*
 * Counter-based random stream.  A stream is identified by (master_seed,
 * stream_index); draws are a pure function of (key, counter), so path i of a
 * simulation always sees the same numbers no matter how many paths run or in
 * which order.  The mixer is the 64-bit finalizer used by splitmix64.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::uint64_t stream = 0)
      : key_(mix(master_seed ^ mix(stream + kGamma))) {}

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGamma); }

  // Uniform on the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cache_ = r * std::sin(a);
    has_cache_ = true;
    return r * std::cos(a);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return ctr_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace otb
