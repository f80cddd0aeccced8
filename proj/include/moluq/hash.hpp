//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_HASH_HPP_
#define MOLUQ_HASH_HPP_

#include <openssl/evp.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace moluq {

constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = kFnvOffsetBasis) noexcept {
  for (char c: data) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

// Accumulates fixed-width little-endian fields into a byte string. Used
// wherever a hash input must be identical across platforms, so every
// multi-byte value goes through here rather than through memcpy of a
// host-order integer.
class ByteWriter {
public:
  ByteWriter &u8(std::uint8_t v) {
    buf_.push_back(static_cast<char>(v));
    return *this;
  }

  ByteWriter &u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      buf_.push_back(static_cast<char>(v & 0xff));
      v >>= 8;
    }
    return *this;
  }

  ByteWriter &i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }

  ByteWriter &str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
    return *this;
  }

  const std::string &bytes() const noexcept { return buf_; }

  std::uint64_t fnv() const noexcept { return fnv1a64(buf_); }

private:
  std::string buf_;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)
      != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

}  // namespace moluq

#endif  // MOLUQ_HASH_HPP_
