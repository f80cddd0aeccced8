//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_RNG_HPP_
#define MOLUQ_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "moluq/hash.hpp"

// Deterministic sampling helpers. std::uniform_int_distribution and
// std::shuffle are implementation-defined across standard libraries, so
// seeded runs would not be reproducible between toolchains if we used them.
// Everything here consumes the raw mt19937_64 stream, whose output sequence
// is pinned by the standard.

namespace moluq::rng {

using Engine = std::mt19937_64;

inline Engine seeded(std::uint64_t seed) { return Engine(seed); }

// Derives an independent stream from a base seed and a salt, so per-item
// randomness does not depend on processing order.
inline Engine derive(std::uint64_t seed, std::string_view salt) {
  ByteWriter w;
  w.u64(seed).str(salt);
  return Engine(w.fnv());
}

// Unbiased integer in [0, n) by rejection sampling.
inline std::uint64_t uniform_index(Engine &eng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t {0} - (~std::uint64_t {0} % n);
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform01(Engine &eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T> &v, Engine &eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(eng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace moluq::rng

#endif  // MOLUQ_RNG_HPP_
