#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace maskrec {

using Rng = std::mt19937_64;

// SplitMix64 step; used to spread user seeds and to derive independent
// per-purpose streams from one base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stream derivation: derive_seed(base, "toygen", video, frame).
inline std::uint64_t derive_seed(std::uint64_t base) { return splitmix64(base); }

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return splitmix64(h);
}

inline std::uint64_t hash_combine(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) h = hash_combine(h, static_cast<std::uint64_t>(c));
  return h;
}

template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t base, const Parts&... parts) {
  std::uint64_t h = splitmix64(base);
  ((h = hash_combine(h, parts)), ...);
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// mt19937_64 state round-trips losslessly through its stream operators.
inline std::string serialize_rng(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline Rng deserialize_rng(const std::string& state) {
  Rng rng;
  std::istringstream is(state);
  is >> rng;
  return rng;
}

}  // namespace maskrec
