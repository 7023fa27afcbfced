#pragma once

#include <cstdint>
#include <random>

namespace splinesde {

using Engine = std::mt19937_64;

/// Reserved stream id for the parameter update of an MCMC iteration.
inline constexpr std::uint64_t kParameterStream = ~std::uint64_t{0};

namespace detail {
// SplitMix64 finaliser, used only to decorrelate (seed, iteration, stream).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Independent engine for one (seed, iteration, stream) triple. Streams are
/// interval indices during imputation, so intervals can be sampled in any
/// order or concurrently with bitwise-identical results.
inline Engine make_stream(std::uint64_t seed, std::uint64_t iteration,
                          std::uint64_t stream) noexcept {
  std::uint64_t key = detail::mix64(seed);
  key = detail::mix64(key ^ iteration);
  key = detail::mix64(key ^ stream);
  return Engine(key);
}

}  // namespace splinesde
