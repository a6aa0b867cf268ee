#ifndef OFFLOAD_RNG_HPP
#define OFFLOAD_RNG_HPP

// Seeding and sampling helpers.
//
// All randomness in the library flows from a single 64-bit master seed.  Every
// independent unit of work (a trajectory, a Monte Carlo sample) draws its own
// engine seed via derive_seed(master, stream, index), so results never depend
// on how work is split across threads: workers fill per-index slots and the
// aggregation loops run in index order.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace offload {

// Stream ids for derive_seed. Keep these stable: changing them changes every
// seeded output.
inline constexpr std::uint64_t kStreamTrajectory = 1;
inline constexpr std::uint64_t kStreamExploitSample = 2;
inline constexpr std::uint64_t kStreamCoopSample = 3;
// one sub-seed per entry of a CLI -N sweep, indexed by list position
inline constexpr std::uint64_t kStreamNSweep = 4;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based seed derivation: absorb stream id and index into the master
// seed through the SplitMix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  std::uint64_t h = mix64(master + 0x9E3779B97F4A7C15ull);
  h = mix64(h ^ (stream + 0x9E3779B97F4A7C15ull));
  h = mix64(h ^ (index + 0xD1B54A32D192ED03ull));
  return h;
}

// mt19937_64 wrapped with the handful of draws the simulators need. The
// uniform uses the top 53 bits, so values are in [0, 1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Exponential with the given rate; log1p keeps the argument away from log(0).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace offload

#endif  // OFFLOAD_RNG_HPP
