#ifndef STRETTO_RNG_HPP
#define STRETTO_RNG_HPP

#include "stretto/common.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace stretto {

// All randomness flows from one master seed through named substreams, so a
// run is reproducible and adding a consumer does not shift the draws of the
// others.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, const std::string& name) {
  return splitmix64(master ^ fnv1a64(name));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, const std::string& stream)
      : engine_(substream_seed(master, stream)) {}

  std::mt19937_64& engine() { return engine_; }

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(engine_);
  }

  // inclusive on both ends
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    std::uniform_int_distribution<std::int64_t> d(lo, hi);
    return d(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(engine_);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stretto

#endif
