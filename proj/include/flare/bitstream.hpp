#pragma once

// Partial-bitstream wire format: sync header, select (marker + FAR) words,
// data frames and a CRC footer. All words are 32-bit, big-endian on disk.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flare/io.hpp"

namespace flare {

using Word = std::uint32_t;

inline constexpr Word kSync = 0xAA995566u;
inline constexpr Word kNop = 0x20000000u;
inline constexpr Word kFarMarker = 0x30002001u;
inline constexpr Word kDataMarker = 0x30040000u;
inline constexpr Word kCrcMarker = 0x30000001u;

// The data marker carries the payload word count in its low bits. Bit 18 is
// part of the marker constant itself, so counts are limited to 18 bits to keep
// the OR encoding unambiguous.
inline constexpr Word kDataCountMask = 0x0003FFFFu;
inline constexpr std::size_t kMaxPayloadWords = kDataCountMask;
inline constexpr std::size_t kMaxHeaderNops = 4096;

struct FrameAddress {
  std::uint8_t prr_id = 0;
  std::uint32_t frame_offset = 0;  // 24 bits

  friend constexpr bool operator==(const FrameAddress&, const FrameAddress&) = default;
};

inline constexpr std::uint32_t kFrameOffsetMask = 0x00FFFFFFu;

constexpr Word pack_far(FrameAddress far) noexcept {
  return (static_cast<Word>(far.prr_id) << 24) | (far.frame_offset & kFrameOffsetMask);
}

constexpr FrameAddress unpack_far(Word w) noexcept {
  return FrameAddress{static_cast<std::uint8_t>(w >> 24), w & kFrameOffsetMask};
}

enum class FormatErrorCode { BadSync, BadMarker, Truncated, BadLength };

constexpr std::string_view to_string(FormatErrorCode code) noexcept {
  switch (code) {
    case FormatErrorCode::BadSync: return "BAD_SYNC";
    case FormatErrorCode::BadMarker: return "BAD_MARKER";
    case FormatErrorCode::Truncated: return "TRUNCATED";
    case FormatErrorCode::BadLength: return "BAD_LENGTH";
  }
  return "UNKNOWN";
}

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  FormatErrorCode code() const noexcept { return code_; }

 private:
  FormatErrorCode code_;
};

// ---------------------------------------------------------------------------
// CRC-32/MPEG-2: poly 0x04C11DB7, init 0xFFFFFFFF, no reflection, no xorout.

namespace detail {

constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i << 24;
    for (int k = 0; k < 8; ++k) c = (c & 0x80000000u) ? (c << 1) ^ 0x04C11DB7u : (c << 1);
    table[i] = c;
  }
  return table;
}

inline constexpr auto kCrcTable = make_crc_table();

constexpr std::uint32_t crc_update(std::uint32_t crc, std::uint8_t byte) noexcept {
  return (crc << 8) ^ kCrcTable[((crc >> 24) ^ byte) & 0xFFu];
}

}  // namespace detail

inline constexpr std::uint32_t kCrcInit = 0xFFFFFFFFu;

constexpr std::uint32_t compute_crc_bytes(std::span<const std::uint8_t> bytes) noexcept {
  std::uint32_t crc = kCrcInit;
  for (auto b : bytes) crc = detail::crc_update(crc, b);
  return crc;
}

/// CRC over payload words, each fed most-significant byte first.
constexpr std::uint32_t compute_crc(std::span<const Word> payload) noexcept {
  std::uint32_t crc = kCrcInit;
  for (Word w : payload) {
    crc = detail::crc_update(crc, static_cast<std::uint8_t>(w >> 24));
    crc = detail::crc_update(crc, static_cast<std::uint8_t>(w >> 16));
    crc = detail::crc_update(crc, static_cast<std::uint8_t>(w >> 8));
    crc = detail::crc_update(crc, static_cast<std::uint8_t>(w));
  }
  return crc;
}

// ---------------------------------------------------------------------------

/// Inclusive word-index range.
struct WordRange {
  std::size_t first = 0;
  std::size_t last = 0;

  constexpr std::size_t size() const noexcept { return last - first + 1; }
  constexpr bool contains(std::size_t i) const noexcept { return i >= first && i <= last; }
  friend constexpr bool operator==(const WordRange&, const WordRange&) = default;
};

/// A parsed bitstream. `data_span` runs from the data marker through the CRC
/// marker; `payload` is the strict subrange holding frame words.
struct BitstreamImage {
  std::vector<Word> words;
  WordRange header_span;
  std::size_t far_marker_index = 0;
  std::size_t far_index = 0;
  WordRange data_span;
  WordRange payload;
  std::size_t crc_index = 0;

  FrameAddress far() const { return unpack_far(words.at(far_index)); }
  std::span<const Word> payload_words() const {
    return std::span<const Word>(words).subspan(payload.first, payload.size());
  }
  Word stored_crc() const { return words.at(crc_index); }

  friend bool operator==(const BitstreamImage&, const BitstreamImage&) = default;
};

struct BuildSpec {
  FrameAddress far;
  std::size_t header_nop_count = 0;
  std::vector<Word> frame_payload;
};

inline BitstreamImage build_bitstream(const BuildSpec& spec, std::size_t frame_words) {
  if (frame_words == 0) throw std::invalid_argument("frame_words must be positive");
  const auto n = spec.frame_payload.size();
  if (n == 0 || n % frame_words != 0)
    throw FormatError(FormatErrorCode::BadLength,
                      "payload of " + std::to_string(n) + " words is not a positive multiple of " +
                          std::to_string(frame_words));
  if (n > kMaxPayloadWords)
    throw FormatError(FormatErrorCode::BadLength, "payload exceeds data marker count field");
  if (spec.header_nop_count > kMaxHeaderNops)
    throw FormatError(FormatErrorCode::BadLength, "header NOP count exceeds bound");

  BitstreamImage img;
  img.words.reserve(1 + spec.header_nop_count + 3 + n + 2);
  img.words.push_back(kSync);
  img.words.insert(img.words.end(), spec.header_nop_count, kNop);
  img.header_span = {0, spec.header_nop_count};
  img.far_marker_index = img.words.size();
  img.words.push_back(kFarMarker);
  img.far_index = img.words.size();
  img.words.push_back(pack_far(spec.far));
  const std::size_t data_marker = img.words.size();
  img.words.push_back(kDataMarker | static_cast<Word>(n));
  img.payload = {img.words.size(), img.words.size() + n - 1};
  img.words.insert(img.words.end(), spec.frame_payload.begin(), spec.frame_payload.end());
  img.words.push_back(kCrcMarker);
  img.data_span = {data_marker, img.words.size() - 1};
  img.crc_index = img.words.size();
  img.words.push_back(compute_crc(spec.frame_payload));
  return img;
}

inline BitstreamImage parse_bitstream(std::span<const Word> words) {
  using enum FormatErrorCode;
  if (words.empty()) throw FormatError(Truncated, "empty bitstream");
  if (words[0] != kSync) throw FormatError(BadSync, "word 0 is not the sync word");

  auto need = [&](std::size_t i, const char* what) {
    if (i >= words.size()) throw FormatError(Truncated, std::string("missing ") + what);
  };

  std::size_t i = 1;
  while (i < words.size() && words[i] == kNop) ++i;
  BitstreamImage img;
  img.header_span = {0, i - 1};

  need(i, "FAR marker");
  if (words[i] != kFarMarker) throw FormatError(BadMarker, "expected FAR marker at word " + std::to_string(i));
  img.far_marker_index = i++;
  need(i, "FAR word");
  img.far_index = i++;

  need(i, "data marker");
  if ((words[i] & ~kDataCountMask) != kDataMarker)
    throw FormatError(BadMarker, "expected data marker at word " + std::to_string(i));
  const std::size_t count = words[i] & kDataCountMask;
  if (count == 0) throw FormatError(BadLength, "data marker declares an empty payload");
  const std::size_t data_marker = i++;

  need(i + count - 1, "payload words");
  img.payload = {i, i + count - 1};
  i += count;
  need(i, "CRC marker");
  if (words[i] != kCrcMarker)
    throw FormatError(BadLength, "declared payload count does not end at the CRC marker");
  img.data_span = {data_marker, i};
  ++i;
  need(i, "CRC word");
  img.crc_index = i++;
  if (i != words.size())
    throw FormatError(BadLength, std::to_string(words.size() - i) + " trailing words after CRC");

  img.words.assign(words.begin(), words.end());
  return img;
}

/// Ground-truth select window: [FAR marker, FAR word], inclusive.
inline WordRange select_window(const BitstreamImage& image) noexcept {
  return {image.far_marker_index, image.far_index};
}

// ---------------------------------------------------------------------------
// .fbit files: the raw word sequence, big-endian, no framing.

inline std::vector<std::uint8_t> to_bytes(std::span<const Word> words) {
  std::vector<std::uint8_t> out;
  out.reserve(words.size() * 4);
  for (Word w : words) {
    out.push_back(static_cast<std::uint8_t>(w >> 24));
    out.push_back(static_cast<std::uint8_t>(w >> 16));
    out.push_back(static_cast<std::uint8_t>(w >> 8));
    out.push_back(static_cast<std::uint8_t>(w));
  }
  return out;
}

inline std::vector<Word> from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0)
    throw FormatError(FormatErrorCode::Truncated, "file size is not a whole number of words");
  std::vector<Word> words(bytes.size() / 4);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto* b = &bytes[i * 4];
    words[i] = (Word{b[0]} << 24) | (Word{b[1]} << 16) | (Word{b[2]} << 8) | Word{b[3]};
  }
  return words;
}

inline std::vector<Word> read_fbit(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return from_bytes(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

inline void write_fbit(const std::filesystem::path& path, std::span<const Word> words) {
  const auto bytes = to_bytes(words);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace flare
