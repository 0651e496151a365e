#include "neurolabel/rng.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace nlab {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(a) ^ (b + 0x632be59bd9b4e019ULL));
}

std::string to_hex(std::uint64_t value) { return fmt::format("{:016x}", value); }

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t bound) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t b = bound;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % b);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % b);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<double> Rng::normal_vector(std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = normal();
  return v;
}

}  // namespace nlab
