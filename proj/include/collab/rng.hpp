#pragma once

// Counter-based 64-bit generator: a key is mixed from (seed, stream) and output k
// is splitmix64(key + golden * k). Results are identical on every platform and
// sub-streams split off without shared state.

#include <cstdint>

namespace collab {

inline constexpr std::uint64_t kDefaultSeed = 42;

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed = kDefaultSeed, std::uint64_t stream = 0)
      : key_(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)) {}

  std::uint64_t next() { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Independent generator for a sub-stream; does not advance this one.
  CounterRng split(std::uint64_t stream) const {
    CounterRng r;
    r.key_ = splitmix64(key_ ^ splitmix64(stream + 0xD1B54A32D192ED03ULL));
    return r;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace collab
