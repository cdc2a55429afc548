#ifndef FSS_RNG_HPP
#define FSS_RNG_HPP

#include <cmath>
#include <cstdint>

namespace fss {

// Counter-based random stream keyed by (seed, stream id, draw index).
//
// Every (seed, stream, draw) triple addresses an independent substream, so
// replicated simulations can hand one substream to each work unit and obtain
// results that do not depend on scheduling or worker count. Within a
// substream, values come from a splitmix64 sequence whose start state is a
// mix of the key, which keeps variable-consumption algorithms (rejection
// sampling) confined to their own substream.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw = 0)
      : state_(mix(mix(mix(seed ^ 0x8e91'57a8'2f63'b1c5ull) ^ stream) ^ draw)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e37'79b9'7f4a'7c15ull;
    return mix(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the companion value is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double t = 2.0 * 3.14159265358979323846 * uniform();
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

  // Uniform index in [0, n); n must be positive.
  std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e37'79b9'7f4a'7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58'476d'1ce4'e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d0'49bb'1331'11ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace fss

#endif
