#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace bwnn {

// Counter-based PRNG built on the splitmix64 output function.
// Each (seed, stream) pair indexes a disjoint counter block of 2^64 draws,
// so substreams never overlap. Replayable: same seed -> same bits, any platform.
inline constexpr const char* kRngVersion = "splitmix64-ctr-v1";

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(seed ^ 0x9e3779b97f4a7c15ULL) ^ mix(stream * 0xbf58476d1ce4e5b9ULL + 1)),
        counter_(0) {}

  // Independent substream; derived streams are keyed off the parent's base state.
  Rng substream(std::uint64_t stream_id) const {
    Rng r(0);
    r.base_ = mix(base_ + 0x94d049bb133111ebULL * (stream_id + 1));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return mix(base_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1], safe as log() argument.
  double next_double_open() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  // Box-Muller; draws two uniforms per call, no cached spare (keeps replay simple).
  double next_gaussian() {
    double u = next_double_open();
    double v = next_double();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Index in [0, n).
  std::uint64_t next_index(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t base_;
  std::uint64_t counter_;
};

inline std::vector<double> sample_gaussian(Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& x : out) x = rng.next_gaussian();
  return out;
}

// chi sample = sqrt(sum of d squared standard normals)
inline double sample_chi(Rng& rng, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    double g = rng.next_gaussian();
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace bwnn
