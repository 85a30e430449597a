#pragma once

#include <cstdint>
#include <random>

#include "madm/linalg.hpp"

namespace madm {

// splitmix64 finaliser; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Per-chain random stream.
///
/// Streams are keyed by (seed, stream) so chain i of a run draws the same
/// numbers regardless of how many threads execute the run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Uniform on [0, 1).
  double uniform();
  double normal();
  Vector normal_vector(Index dim);
  // Poisson(mean); mean == 0 returns 0.
  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace madm
