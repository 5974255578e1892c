#ifndef WAVEPOSE_RNG_HPP
#define WAVEPOSE_RNG_HPP

#include <cstdint>
#include <random>

namespace wavepose {

/// SplitMix64 step; used to derive independent per-trial seeds from a master
/// seed and a stream index so parallel trials stay reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream * 0xD1342543DE82EF95ull + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

}  // namespace wavepose

#endif  // WAVEPOSE_RNG_HPP
