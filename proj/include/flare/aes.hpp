#pragma once

// Byte-oriented AES-128 encryption (FIPS-197). Used as the golden model for
// the AES victim instances.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flare::aes {

using Block = std::array<std::uint8_t, 16>;
using Key128 = std::array<std::uint8_t, 16>;

namespace detail {

inline constexpr std::array<std::uint8_t, 256> kSbox = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16};

constexpr std::uint8_t xtime(std::uint8_t x) noexcept {
  return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0x00));
}

using RoundKeys = std::array<Block, 11>;

constexpr RoundKeys key_expansion(const Key128& key) noexcept {
  RoundKeys rk{};
  rk[0] = key;
  std::uint8_t rcon = 0x01;
  for (int r = 1; r <= 10; ++r) {
    const Block& prev = rk[r - 1];
    Block& cur = rk[r];
    // RotWord + SubWord + Rcon on the last column of the previous round key.
    std::array<std::uint8_t, 4> t = {kSbox[prev[13]], kSbox[prev[14]], kSbox[prev[15]], kSbox[prev[12]]};
    t[0] ^= rcon;
    rcon = xtime(rcon);
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < 4; ++i) {
        const std::uint8_t feed = c == 0 ? t[i] : cur[(c - 1) * 4 + i];
        cur[c * 4 + i] = prev[c * 4 + i] ^ feed;
      }
  }
  return rk;
}

constexpr void add_round_key(Block& s, const Block& k) noexcept {
  for (int i = 0; i < 16; ++i) s[i] ^= k[i];
}

constexpr void sub_bytes(Block& s) noexcept {
  for (auto& b : s) b = kSbox[b];
}

// State is column-major: byte (row r, column c) lives at s[4c + r].
constexpr void shift_rows(Block& s) noexcept {
  Block t = s;
  for (int r = 1; r < 4; ++r)
    for (int c = 0; c < 4; ++c) s[4 * c + r] = t[4 * ((c + r) % 4) + r];
}

constexpr void mix_columns(Block& s) noexcept {
  for (int c = 0; c < 4; ++c) {
    std::uint8_t* col = &s[4 * c];
    const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
    const std::uint8_t all = a0 ^ a1 ^ a2 ^ a3;
    col[0] ^= all ^ xtime(a0 ^ a1);
    col[1] ^= all ^ xtime(a1 ^ a2);
    col[2] ^= all ^ xtime(a2 ^ a3);
    col[3] ^= all ^ xtime(a3 ^ a0);
  }
}

}  // namespace detail

constexpr Block encrypt(const Key128& key, const Block& plaintext) noexcept {
  const auto rk = detail::key_expansion(key);
  Block s = plaintext;
  detail::add_round_key(s, rk[0]);
  for (int r = 1; r < 10; ++r) {
    detail::sub_bytes(s);
    detail::shift_rows(s);
    detail::mix_columns(s);
    detail::add_round_key(s, rk[r]);
  }
  detail::sub_bytes(s);
  detail::shift_rows(s);
  detail::add_round_key(s, rk[10]);
  return s;
}

/// Parses exactly 32 hex digits.
constexpr std::optional<Block> block_from_hex(std::string_view hex) noexcept {
  if (hex.size() != 32) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Block b{};
  for (std::size_t i = 0; i < 16; ++i) {
    const int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    b[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return b;
}

inline std::string to_hex(const Block& b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(32);
  for (auto v : b) {
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 0xF]);
  }
  return out;
}

}  // namespace flare::aes
