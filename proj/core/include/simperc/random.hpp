#pragma once

// Deterministic random number streams.
//
// Every stochastic routine in the library draws from an RngStream obtained
// through derive_stream(root, tag, replica).  The derivation is a fixed
// splitmix64 mix of (root seed, purpose tag, replica index, optional lane),
// so a (root seed, config) pair pins down every random decision of a run,
// replica by replica, independent of scheduling order or worker count.
//
// All variates are produced from raw 64-bit draws with hand-rolled
// conversions (no std::*_distribution), which keeps output byte-identical
// across standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>

namespace simperc {

// Purpose tags for stream derivation. Values are part of the wire-level
// reproducibility contract and must never be renumbered.
enum class StreamTag : std::uint64_t {
  kPointProcess = 1,   // base Poisson sampling
  kSuperpose = 2,      // extra points for coupled intensity increments
  kResampleEdit = 3,   // box resampling edits (influence estimation)
  kPivotEdit = 4,      // uniform point insertion edits (pivotality)
  kMarks1 = 5,         // first mark layer
  kMarks2 = 6,         // second mark layer
  kExploration = 7,    // exploration-internal randomness (currently unused)
  kShuffle = 8,        // deterministic shuffles (e.g. miniball ordering)
  kTest = 9,           // reserved for test fixtures
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Collapses (root, tag, replica, lane) into one 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t root, StreamTag tag,
                                 std::uint64_t replica,
                                 std::uint64_t lane = 0) {
  std::uint64_t s = root;
  std::uint64_t a = splitmix64(s);
  s ^= static_cast<std::uint64_t>(tag) * 0xd1342543de82ef95ULL;
  std::uint64_t b = splitmix64(s);
  s ^= replica * 0xaf251af3b0f025b5ULL;
  std::uint64_t c = splitmix64(s);
  s ^= lane * 0x9e3779b97f4a7c15ULL;
  std::uint64_t d = splitmix64(s);
  return a ^ (b << 1) ^ (c >> 1) ^ d;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n). n must be positive; rejection keeps it exact.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Exact Poisson count by accumulating unit-rate exponential arrivals
  // until they pass `mean`. Linear in the mean, stable for mean < ~1e6.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) return 0;
    std::uint64_t count = 0;
    double t = 0.0;
    for (;;) {
      double u = uniform01();
      // uniform01 can return 0; flip to the open side to keep log finite.
      t += -std::log(1.0 - u);
      if (t > mean) break;
      ++count;
    }
    return count;
  }

 private:
  std::mt19937_64 engine_;
};

inline RngStream derive_stream(std::uint64_t root, StreamTag tag,
                               std::uint64_t replica,
                               std::uint64_t lane = 0) {
  return RngStream(derive_seed(root, tag, replica, lane));
}

}  // namespace simperc
