#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rosdyn {

// FNV-1a, used for instance fingerprints and seed derivation.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Every randomized operation derives its seed from the global seed and its
// own name, so concurrent execution order cannot change results.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view op_name) {
  return global_seed ^ fnv1a64(op_name);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace rosdyn
