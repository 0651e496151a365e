#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace nlab {

// Hashing and sampling helpers whose outputs are fixed across platforms and
// standard-library versions. std::*_distribution is implementation-defined,
// so golden values are never routed through it.

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;
std::string to_hex(std::uint64_t value);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01();
  /// Uniform integer in [0, bound); bound must be > 0.
  std::size_t below(std::size_t bound);
  /// Standard normal via Box-Muller.
  double normal();

  std::vector<double> normal_vector(std::size_t dim);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nlab
