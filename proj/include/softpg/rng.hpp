#pragma once

#include <cstdint>
#include <random>

namespace softpg {

// Named substream families derived from the master seed. Keeping these
// separate means e.g. changing the evaluation schedule cannot shift the
// randomness seen by training.
enum class Stream : std::uint64_t {
  Init = 1,
  Env = 2,
  Sample = 3,
  Eval = 4,
  Shuffle = 5,
  Alpha = 6,
  Replay = 7,
};

// splitmix64 finalizer; used to spread (seed, stream, index) into engine seeds.
std::uint64_t mix64(std::uint64_t x);

// Deterministic PRNG wrapper. All randomness in the library flows through
// this class so that runs are reproducible from a single master seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t master_seed, Stream family,
                       std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (no cached second draw, so the stream
  // position is two u64s per call).
  double normal();

  // Uniform integer in [0, n).
  int uniform_int(int n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace softpg
