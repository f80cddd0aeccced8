//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_FINGERPRINT_HPP_
#define MOLUQ_FINGERPRINT_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "moluq/hash.hpp"
#include "moluq/molgraph.hpp"

namespace moluq {

class WidthMismatch: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

constexpr int kDefaultFpRadius = 2;
constexpr int kDefaultFpWidth = 2048;

// Serialized fingerprints carry this prefix; bump the version whenever the
// hashing scheme changes, since old hex strings would silently disagree.
inline constexpr std::string_view kFingerprintFormat = "ecfp:v1";

struct Fingerprint {
  int radius = kDefaultFpRadius;
  int width = kDefaultFpWidth;
  std::vector<std::uint64_t> blocks;
  int popcount = 0;

  bool test(int bit) const {
    return (blocks[bit >> 6] >> (bit & 63)) & 1;
  }

  void set(int bit) {
    std::uint64_t &block = blocks[bit >> 6];
    std::uint64_t mask = std::uint64_t {1} << (bit & 63);
    if (!(block & mask)) {
      block |= mask;
      ++popcount;
    }
  }

  // "ecfp:v1:<radius>:<width>:<hex>", hex low byte first, two chars per
  // byte, bit k of the vector at byte k/8, mask 1<<(k%8).
  std::string to_string() const {
    std::string out(kFingerprintFormat);
    out += ':' + std::to_string(radius) + ':' + std::to_string(width) + ':';
    static constexpr char kHex[] = "0123456789abcdef";
    for (int byte = 0; byte < width / 8; ++byte) {
      std::uint8_t v =
          static_cast<std::uint8_t>(blocks[byte >> 3] >> ((byte & 7) * 8));
      out += kHex[v >> 4];
      out += kHex[v & 15];
    }
    return out;
  }

  static Fingerprint from_string(std::string_view text) {
    auto fail = []() -> Fingerprint {
      throw std::invalid_argument("malformed fingerprint string");
    };
    if (text.substr(0, kFingerprintFormat.size()) != kFingerprintFormat)
      return fail();
    text.remove_prefix(kFingerprintFormat.size());
    auto take_int = [&](int &out) {
      if (text.empty() || text[0] != ':') return false;
      text.remove_prefix(1);
      std::size_t len = 0;
      out = 0;
      while (len < text.size()
             && std::isdigit(static_cast<unsigned char>(text[len]))) {
        out = out * 10 + (text[len] - '0');
        ++len;
      }
      text.remove_prefix(len);
      return len > 0;
    };
    Fingerprint fp;
    if (!take_int(fp.radius) || !take_int(fp.width)) return fail();
    if (fp.width < 64 || !std::has_single_bit(unsigned(fp.width)))
      return fail();
    if (text.empty() || text[0] != ':') return fail();
    text.remove_prefix(1);
    if (static_cast<int>(text.size()) != fp.width / 4) return fail();
    fp.blocks.assign(fp.width / 64, 0);
    auto nibble = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      return -1;
    };
    for (int byte = 0; byte < fp.width / 8; ++byte) {
      int hi = nibble(text[2 * byte]);
      int lo = nibble(text[2 * byte + 1]);
      if (hi < 0 || lo < 0) return fail();
      fp.blocks[byte >> 3] |= std::uint64_t((hi << 4) | lo) << ((byte & 7) * 8);
    }
    for (std::uint64_t block: fp.blocks)
      fp.popcount += std::popcount(block);
    return fp;
  }
};

namespace detail {

inline std::uint64_t atom_invariant_id(const MolGraph &mol, int atom) {
  const Atom &a = mol.atoms()[atom];
  ByteWriter w;
  w.u8('A')
      .u64(static_cast<std::uint64_t>(atomic_number(a.element)))
      .i64(a.charge)
      .u64(static_cast<std::uint64_t>(mol.degree(atom)))
      .u64(static_cast<std::uint64_t>(mol.hydrogen_count(atom)))
      .u8(a.aromatic ? 1 : 0);
  return w.fnv();
}

// Identifiers of every atom neighborhood at radii 0..radius. The multiset
// (deduplicated to a set) is what folding compresses; tests compare folded
// Tanimoto against Jaccard over these sets directly.
inline std::vector<std::uint64_t> circular_identifiers(const MolGraph &mol,
                                                       int radius) {
  int n = static_cast<int>(mol.atoms().size());
  std::vector<std::uint64_t> ids(n);
  std::vector<std::uint64_t> all;
  all.reserve(static_cast<std::size_t>(n) * (radius + 1));
  for (int i = 0; i < n; ++i) {
    ids[i] = atom_invariant_id(mol, i);
    all.push_back(ids[i]);
  }
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<std::uint8_t, std::uint64_t>> nbrs;
      nbrs.reserve(mol.incident(i).size());
      for (int b: mol.incident(i)) {
        const Bond &bond = mol.bonds()[b];
        nbrs.emplace_back(static_cast<std::uint8_t>(bond.order),
                          ids[bond.other(i)]);
      }
      std::sort(nbrs.begin(), nbrs.end());
      ByteWriter w;
      w.u8('I').u64(ids[i]);
      for (const auto &[order, id]: nbrs) w.u8(order).u64(id);
      next[i] = w.fnv();
      all.push_back(next[i]);
    }
    ids = std::move(next);
  }
  return all;
}

}  // namespace detail

inline Fingerprint circular_fingerprint(const MolGraph &mol,
                                        int radius = kDefaultFpRadius,
                                        int width = kDefaultFpWidth) {
  if (radius < 0 || radius > 6)
    throw std::invalid_argument("fingerprint radius must be in [0, 6]");
  if (width < 64 || !std::has_single_bit(unsigned(width)))
    throw std::invalid_argument("fingerprint width must be a power of two");
  Fingerprint fp;
  fp.radius = radius;
  fp.width = width;
  fp.blocks.assign(width / 64, 0);
  for (std::uint64_t id: detail::circular_identifiers(mol, radius))
    fp.set(static_cast<int>(id % static_cast<std::uint64_t>(width)));
  return fp;
}

inline double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width != b.width)
    throw WidthMismatch("fingerprint widths differ: "
                        + std::to_string(a.width) + " vs "
                        + std::to_string(b.width));
  int inter = 0;
  int uni = 0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    inter += std::popcount(a.blocks[i] & b.blocks[i]);
    uni += std::popcount(a.blocks[i] | b.blocks[i]);
  }
  // Two all-zero fingerprints describe the same (empty) substructure set.
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace moluq

#endif  // MOLUQ_FINGERPRINT_HPP_
