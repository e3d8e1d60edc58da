#pragma once

#include <cstdint>
#include <random>

namespace sinkrank {

// splitmix64 finalizer, used to derive independent substreams from
// (seed, counter, role) triples without correlated low bits.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return std::mt19937_64(mix64(mix64(seed ^ mix64(a)) ^ mix64(b ^ 0xD1B54A32D192ED03ULL)));
}

// Uniform double in [0,1) with 53 random bits; avoids the
// implementation-defined behavior of uniform_real_distribution.
inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n).
inline int uniform_index(std::mt19937_64& rng, int n) {
  int k = static_cast<int>(u01(rng) * n);
  return k < n ? k : n - 1;
}

// Sample an index from a cumulative walk over `probs` (row of a stochastic
// matrix); the final index absorbs any rounding slack.
template <typename Row>
int sample_row(std::mt19937_64& rng, const Row& probs, int n) {
  double u = u01(rng);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += probs(i);
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace sinkrank
