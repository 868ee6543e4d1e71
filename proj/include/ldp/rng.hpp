#pragma once

#include <cmath>
#include <cstdint>

namespace ldp {

// Counter-based generator: draw i depends only on (key, i), so independent
// streams can be forked for data generation, noise, and initialization and
// each replays identically regardless of what the others consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed + 0x9e3779b97f4a7c15ull) ^ mix(stream))) {}

  // Independent child stream; the parent's counter is not advanced.
  Rng fork(std::uint64_t stream) const {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(stream + 0x6a09e667f3bcc909ull));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return mix(key_ + 0xd1b54a32d192ed03ull * ++counter_); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; two uniforms per draw, no cached spare, so the draw count
  // per call is fixed and streams stay aligned across code paths.
  double normal() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;       // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // [0, n), multiply-shift
  std::int64_t uniform_int(std::int64_t n) {
    return static_cast<std::int64_t>((static_cast<unsigned __int128>(next_u64()) *
                                      static_cast<unsigned __int128>(n)) >>
                                     64);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace ldp
