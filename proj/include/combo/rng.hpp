#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace combo {

using Rng = std::mt19937_64;

/// Independent random streams derived from one master seed.
enum class Stream : std::uint64_t {
  kInitialDesign = 1,
  kSampler = 2,
  kAcquisition = 3,
  kBenchmark = 4,
  kBaseline = 5,
};

// splitmix64 finalizer
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream) noexcept {
  return mix_seed(mix_seed(master) ^ mix_seed(static_cast<std::uint64_t>(stream) * 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, Stream stream) { return Rng(derive_seed(master, stream)); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace combo
