#pragma once

// CoRQ-style reconfiguration manager: stores incoming words (the path the
// attacker corrupts), checks the data CRC, then configures the fabric at the
// address found in storage. A status register is readable by any tenant.

#include <atomic>
#include <chrono>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "flare/bitstream.hpp"
#include "flare/fabric.hpp"

namespace flare {

using Nanos = std::chrono::nanoseconds;

enum class RmState : std::uint8_t { Idle, Loading, CrcCheck, Configuring, Done, Blocked };
enum class BlockReason : std::uint8_t { None, BadFormat, CrcFail, AddrOor };

constexpr std::string_view to_string(RmState s) noexcept {
  switch (s) {
    case RmState::Idle: return "IDLE";
    case RmState::Loading: return "LOADING";
    case RmState::CrcCheck: return "CRC_CHECK";
    case RmState::Configuring: return "CONFIGURING";
    case RmState::Done: return "DONE";
    case RmState::Blocked: return "BLOCKED";
  }
  return "UNKNOWN";
}

constexpr std::string_view to_string(BlockReason r) noexcept {
  switch (r) {
    case BlockReason::None: return "NONE";
    case BlockReason::BadFormat: return "BAD_FORMAT";
    case BlockReason::CrcFail: return "CRC_FAIL";
    case BlockReason::AddrOor: return "ADDR_OOR";
  }
  return "UNKNOWN";
}

struct StatusRegister {
  RmState state = RmState::Idle;
  BlockReason block_reason = BlockReason::None;
  std::uint64_t words_loaded = 0;
  bool busy = false;

  friend bool operator==(const StatusRegister&, const StatusRegister&) = default;
};

struct RmOutcome {
  RmState final_state = RmState::Idle;
  std::optional<BlockReason> block_reason;
  std::vector<Word> stored_words;
  std::optional<BitstreamImage> stored_image;  // absent when storage did not parse
  std::optional<WriteReport> write_report;
};

/// Per-word corruption hook: (word index, word, transfer time) -> stored word.
template <typename F>
concept WordInjector = std::invocable<F&, std::size_t, Word, Nanos> &&
                       std::convertible_to<std::invoke_result_t<F&, std::size_t, Word, Nanos>, Word>;

struct IdentityInjector {
  Word operator()(std::size_t, Word w, Nanos) const noexcept { return w; }
};

inline bool crc_check(const BitstreamImage& image) noexcept {
  return compute_crc(image.payload_words()) == image.stored_crc();
}

class ReconfigManager {
 public:
  /// Snapshot of the status register. Safe to call from any thread while a
  /// reconfiguration runs; the register is a single atomic word.
  StatusRegister read_status() const noexcept { return unpack(status_.load(std::memory_order_acquire)); }

  template <WordInjector Injector>
  RmOutcome run_reconfiguration(std::span<const Word> words, Injector&& injector, Nanos word_period,
                                Fabric& fabric) {
    if (word_period <= Nanos::zero()) throw std::invalid_argument("word period must be positive");
    RmOutcome out;
    out.stored_words.reserve(words.size());

    publish(RmState::Loading, BlockReason::None, 0);
    for (std::size_t i = 0; i < words.size(); ++i) {
      const Nanos t = word_period * static_cast<std::int64_t>(i);
      out.stored_words.push_back(static_cast<Word>(injector(i, words[i], t)));
      publish(RmState::Loading, BlockReason::None, i + 1);
    }
    const std::uint64_t loaded = words.size();

    auto block = [&](BlockReason reason) {
      out.final_state = RmState::Blocked;
      out.block_reason = reason;
      publish(RmState::Blocked, reason, loaded);
      return std::move(out);
    };

    try {
      out.stored_image = parse_bitstream(out.stored_words);
    } catch (const FormatError&) {
      return block(BlockReason::BadFormat);
    }
    if (out.stored_image->payload.size() % fabric.geometry().frame_words != 0)
      return block(BlockReason::BadFormat);

    publish(RmState::CrcCheck, BlockReason::None, loaded);
    if (!crc_check(*out.stored_image)) return block(BlockReason::CrcFail);

    const FrameAddress far = out.stored_image->far();
    if (!fabric.contains(far)) return block(BlockReason::AddrOor);

    publish(RmState::Configuring, BlockReason::None, loaded);
    out.write_report = fabric.apply_frames(far, out.stored_image->payload_words());
    out.final_state = RmState::Done;
    publish(RmState::Done, BlockReason::None, loaded);
    return out;
  }

  RmOutcome run_reconfiguration(std::span<const Word> words, Nanos word_period, Fabric& fabric) {
    return run_reconfiguration(words, IdentityInjector{}, word_period, fabric);
  }

 private:
  // Layout: [2:0] state, [5:3] reason, [63:8] words loaded.
  static constexpr std::uint64_t pack(RmState s, BlockReason r, std::uint64_t n) noexcept {
    return std::uint64_t{static_cast<std::uint8_t>(s)} | (std::uint64_t{static_cast<std::uint8_t>(r)} << 3) |
           (n << 8);
  }
  static constexpr StatusRegister unpack(std::uint64_t v) noexcept {
    StatusRegister s;
    s.state = static_cast<RmState>(v & 0x7u);
    s.block_reason = static_cast<BlockReason>((v >> 3) & 0x7u);
    s.words_loaded = v >> 8;
    s.busy = s.state == RmState::Loading || s.state == RmState::CrcCheck || s.state == RmState::Configuring;
    return s;
  }
  void publish(RmState s, BlockReason r, std::uint64_t n) noexcept {
    status_.store(pack(s, r, n), std::memory_order_release);
  }

  std::atomic<std::uint64_t> status_{pack(RmState::Idle, BlockReason::None, 0)};
};

}  // namespace flare
