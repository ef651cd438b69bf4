#pragma once

#include <cstdint>
#include <random>

namespace seqpred {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic RNG wrapper. mt19937_64 has a fully specified algorithm, and
// we derive uniforms from raw engine output, so identical seeds reproduce
// identical streams on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  // Independent stream for (seed, stream index); lets parallel samplers
  // produce results that do not depend on scheduling.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51'7c'c1'b7'27'22'0a'95ULL));
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform double in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace seqpred
