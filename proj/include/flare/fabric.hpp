#pragma once

// FPGA fabric as an array of partially reconfigurable regions (PRRs), each a
// run of configuration frames. Live state is written by reconfiguration and
// compared against an immutable golden copy to find corrupted units.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flare/bitstream.hpp"

namespace flare {

struct FabricGeometry {
  std::size_t prr_count = 8;
  std::size_t frames_per_prr = 1024;
  std::size_t frame_words = 4;

  std::size_t total_frames() const noexcept { return prr_count * frames_per_prr; }
  std::size_t total_words() const noexcept { return total_frames() * frame_words; }
  friend bool operator==(const FabricGeometry&, const FabricGeometry&) = default;
};

struct FrameRef {
  std::uint8_t prr_id = 0;
  std::uint32_t frame = 0;
  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

struct WriteReport {
  std::vector<FrameRef> frames_written;
  bool clipped = false;
};

/// A victim unit's footprint: an inclusive frame range inside one PRR.
struct Placement {
  std::string unit_id;
  std::uint8_t prr_id = 0;
  std::uint32_t first_frame = 0;
  std::uint32_t last_frame = 0;

  bool overlaps(const Placement& o) const noexcept {
    return prr_id == o.prr_id && first_frame <= o.last_frame && o.first_frame <= last_frame;
  }
};

/// Corrupted unit id -> nonzero (odd) digest of its live/golden delta.
using CorruptedUnits = std::map<std::string, std::uint32_t>;

class AddressOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Deterministic filler for golden configuration memory.
inline std::vector<Word> default_golden_contents(const FabricGeometry& g) {
  std::vector<Word> words(g.total_words());
  std::uint64_t x = 0x243F6A8885A308D3ull;
  for (auto& w : words) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    w = static_cast<Word>(x >> 32);
  }
  return words;
}

class Fabric {
 public:
  explicit Fabric(FabricGeometry geometry)
      : Fabric(geometry, default_golden_contents(geometry)) {}

  Fabric(FabricGeometry geometry, std::vector<Word> golden)
      : geometry_(geometry),
        golden_(std::make_shared<const std::vector<Word>>(std::move(golden))),
        live_(*golden_),
        dirty_(geometry.total_frames(), false) {
    if (geometry_.prr_count == 0 || geometry_.prr_count > 256 || geometry_.frames_per_prr == 0 ||
        geometry_.frames_per_prr > (std::size_t{1} << 24) || geometry_.frame_words == 0)
      throw std::invalid_argument("invalid fabric geometry");
    if (golden_->size() != geometry_.total_words())
      throw std::invalid_argument("golden contents do not match fabric geometry");
  }

  // Copies share the immutable golden image and own their live state.
  Fabric(const Fabric&) = default;
  Fabric& operator=(const Fabric&) = default;
  Fabric(Fabric&&) noexcept = default;
  Fabric& operator=(Fabric&&) noexcept = default;

  const FabricGeometry& geometry() const noexcept { return geometry_; }

  bool contains(FrameAddress far) const noexcept {
    return far.prr_id < geometry_.prr_count && far.frame_offset < geometry_.frames_per_prr;
  }

  std::span<const Word> live_frame(std::uint8_t prr, std::uint32_t frame) const {
    return std::span<const Word>(live_).subspan(word_index(prr, frame), geometry_.frame_words);
  }
  std::span<const Word> golden_frame(std::uint8_t prr, std::uint32_t frame) const {
    return std::span<const Word>(*golden_).subspan(word_index(prr, frame), geometry_.frame_words);
  }

  bool live_equals_golden() const { return live_ == *golden_; }

  /// Region label -> LUT utilization (percent). Descriptive only.
  std::map<std::string, double>& lut_budget() noexcept { return lut_budget_; }
  const std::map<std::string, double>& lut_budget() const noexcept { return lut_budget_; }

  /// Writes whole frames starting at `far`. Frames past the end of the PRR are
  /// dropped and reported as clipped; nothing spills into the next region.
  WriteReport apply_frames(FrameAddress far, std::span<const Word> payload) {
    if (!contains(far))
      throw AddressOutOfRange("frame address (" + std::to_string(far.prr_id) + ", " +
                              std::to_string(far.frame_offset) + ") outside fabric");
    const auto fw = geometry_.frame_words;
    if (payload.size() % fw != 0)
      throw std::invalid_argument("payload is not a whole number of frames");

    WriteReport report;
    const std::size_t frames = payload.size() / fw;
    const std::size_t room = geometry_.frames_per_prr - far.frame_offset;
    const std::size_t n = std::min(frames, room);
    report.clipped = frames > room;
    report.frames_written.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto frame = static_cast<std::uint32_t>(far.frame_offset + k);
      const std::size_t base = word_index(far.prr_id, frame);
      std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(k * fw), fw,
                  live_.begin() + static_cast<std::ptrdiff_t>(base));
      mark_dirty(far.prr_id, frame);
      report.frames_written.push_back({far.prr_id, frame});
    }
    return report;
  }

  /// Restores only frames touched since the last reset.
  void reset_to_golden() {
    const auto fw = geometry_.frame_words;
    for (std::size_t f : dirty_list_) {
      std::copy_n(golden_->begin() + static_cast<std::ptrdiff_t>(f * fw), fw,
                  live_.begin() + static_cast<std::ptrdiff_t>(f * fw));
      dirty_[f] = false;
    }
    dirty_list_.clear();
  }

  /// FNV-1a over (frame_index, live ^ golden) for every differing word in the
  /// unit's range, ascending; bit 0 forced so the digest is never zero.
  /// Returns 0 when the unit is intact.
  std::uint32_t unit_delta_digest(const Placement& p) const {
    std::uint32_t h = 2166136261u;
    bool differs = false;
    auto feed = [&h](std::uint32_t v) {
      for (int i = 0; i < 4; ++i) {
        h ^= (v >> (8 * i)) & 0xFFu;
        h *= 16777619u;
      }
    };
    for (std::uint32_t f = p.first_frame; f <= p.last_frame; ++f) {
      const auto live = live_frame(p.prr_id, f);
      const auto gold = golden_frame(p.prr_id, f);
      for (std::size_t w = 0; w < live.size(); ++w) {
        const Word delta = live[w] ^ gold[w];
        if (delta == 0) continue;
        differs = true;
        feed(f);
        feed(delta);
      }
    }
    return differs ? (h | 1u) : 0u;
  }

  CorruptedUnits diff_corrupted_units(std::span<const Placement> placements) const {
    CorruptedUnits out;
    if (dirty_list_.empty()) return out;
    for (const auto& p : placements) {
      if (!range_may_differ(p)) continue;
      if (auto d = unit_delta_digest(p)) out.emplace(p.unit_id, d);
    }
    return out;
  }

  bool placement_fits(const Placement& p) const noexcept {
    return p.prr_id < geometry_.prr_count && p.first_frame <= p.last_frame &&
           p.last_frame < geometry_.frames_per_prr;
  }

 private:
  std::size_t frame_index(std::uint8_t prr, std::uint32_t frame) const noexcept {
    return std::size_t{prr} * geometry_.frames_per_prr + frame;
  }
  std::size_t word_index(std::uint8_t prr, std::uint32_t frame) const {
    if (prr >= geometry_.prr_count || frame >= geometry_.frames_per_prr)
      throw AddressOutOfRange("frame outside fabric");
    return frame_index(prr, frame) * geometry_.frame_words;
  }
  void mark_dirty(std::uint8_t prr, std::uint32_t frame) {
    const auto f = frame_index(prr, frame);
    if (!dirty_[f]) {
      dirty_[f] = true;
      dirty_list_.push_back(f);
    }
  }
  bool range_may_differ(const Placement& p) const {
    for (std::uint32_t f = p.first_frame; f <= p.last_frame; ++f)
      if (dirty_[frame_index(p.prr_id, f)]) return true;
    return false;
  }

  FabricGeometry geometry_;
  std::shared_ptr<const std::vector<Word>> golden_;
  std::vector<Word> live_;
  std::vector<bool> dirty_;
  std::vector<std::size_t> dirty_list_;
  std::map<std::string, double> lut_budget_;
};

}  // namespace flare
