#pragma once

#include <cstdint>

namespace asp {

// Counter-based uniform stream: every draw is a pure function of
// (seed, row, column), so results do not depend on evaluation order and a
// draw can always be regenerated from its coordinates.
namespace rng {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash3(std::uint64_t seed, std::uint64_t row, std::uint64_t col) noexcept {
  return mix64(mix64(mix64(seed) + row) + col);
}

// Strictly inside (0,1): the 53-bit lattice shifted by half a step.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t seed, std::uint64_t row, std::uint64_t col) noexcept {
  return to_open_unit(hash3(seed, row, col));
}

// Independent child seed for replication `stream` of experiment `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream ^ 0x5851f42d4c957f2dULL));
}

}  // namespace rng
}  // namespace asp
