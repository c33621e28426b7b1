#ifndef SEQEPI_RNG_HPP
#define SEQEPI_RNG_HPP

#include <cstdint>

namespace seqepi {

// splitmix64 step; used to derive independent per-trajectory streams.
std::uint64_t splitmix64(std::uint64_t& state);

// Small self-contained xoshiro256** generator. Each trajectory gets its own
// stream keyed by (seed, stream_index), so draws are reproducible no matter
// in which order trajectories are generated.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next_u64();

  // Uniform double in (0, 1).
  double next_unit();

  // Poisson draw. Inversion by multiplication for small means, Hormann's
  // PTRS transformed rejection for mean >= 10.
  std::int64_t next_poisson(double mean);

 private:
  std::uint64_t s_[4];
};

}  // namespace seqepi

#endif
