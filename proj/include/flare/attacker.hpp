#pragma once

// Power-waster model: RO grid parameters -> per-bit flip probability, an
// activation plan timed to the select words, and the in-flight corruption.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "flare/bitstream.hpp"
#include "flare/reconfig_manager.hpp"

namespace flare {

enum class WasterKind { CombinationalRo, SelfClockedRo };

constexpr std::string_view to_string(WasterKind k) noexcept {
  return k == WasterKind::CombinationalRo ? "combinational_ro" : "self_clocked_ro";
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kMaxWasterCount = 16000;
inline constexpr double kBandLowHz = 1e5;
inline constexpr double kBandHighHz = 1e6;

struct PowerWasterConfig {
  WasterKind kind = WasterKind::CombinationalRo;
  std::uint32_t count = kMaxWasterCount;
  double toggle_freq_hz = 5e5;
  double duty = 0.5;
  double p_max = 0.005;

  void validate() const {
    if (count > kMaxWasterCount) throw ConfigError("power-waster count exceeds 16000");
    if (!(toggle_freq_hz >= 0.0)) throw ConfigError("toggle frequency must be non-negative");
    if (!(duty >= 0.0 && duty <= 1.0)) throw ConfigError("duty must be in [0, 1]");
    if (!(p_max >= 0.0 && p_max <= 1.0)) throw ConfigError("p_max must be in [0, 1]");
  }
};

/// p_max * (count / 16000) * duty, gated to the effective toggling band.
inline double bit_flip_probability(const PowerWasterConfig& cfg) {
  cfg.validate();
  const bool in_band = cfg.toggle_freq_hz >= kBandLowHz && cfg.toggle_freq_hz <= kBandHighHz;
  if (!in_band) return 0.0;
  return cfg.p_max * (static_cast<double>(cfg.count) / kMaxWasterCount) * cfg.duty;
}

struct ActivationPlan {
  Nanos glitch_start{0};  // corruption-effective interval, half-open
  Nanos glitch_end{0};
  Nanos activation_start{0};  // RO-active interval, half-open
  Nanos exposure{0};
  WordRange target_word_span;

  Nanos activation_end() const noexcept { return activation_start + exposure; }
  bool in_glitch(Nanos t) const noexcept { return t >= glitch_start && t < glitch_end; }
};

/// Widens the select span by `guard_words` on each side, turns it into
/// transfer times, and centres an `exposure`-long activation on it.
inline ActivationPlan plan_activation(WordRange select_span, Nanos word_period, std::size_t guard_words,
                                      Nanos exposure) {
  if (word_period <= Nanos::zero()) throw ConfigError("word period must be positive");
  ActivationPlan plan;
  plan.target_word_span.first = select_span.first > guard_words ? select_span.first - guard_words : 0;
  plan.target_word_span.last = select_span.last + guard_words;
  plan.glitch_start = word_period * static_cast<std::int64_t>(plan.target_word_span.first);
  plan.glitch_end = word_period * static_cast<std::int64_t>(plan.target_word_span.last + 1);
  const Nanos glitch = plan.glitch_end - plan.glitch_start;
  if (exposure < glitch) throw ConfigError("exposure is shorter than the glitch window");
  const Nanos mid = plan.glitch_start + glitch / 2;
  plan.activation_start = std::max(Nanos::zero(), mid - exposure / 2);
  plan.exposure = exposure;
  return plan;
}

/// Per-trial random stream. mt19937_64 output is fully specified by the
/// standard; the double conversion is done by hand for the same reason.
class FaultRng {
 public:
  explicit FaultRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Inside the glitch interval each bit flips independently with `p_bit`;
/// draws are taken for bits 31 down to 0 whether or not they flip.
inline Word inject(Word word, Nanos t, const ActivationPlan& plan, double p_bit, FaultRng& rng) noexcept {
  if (!plan.in_glitch(t)) return word;
  Word mask = 0;
  for (int bit = 31; bit >= 0; --bit)
    if (rng.uniform() < p_bit) mask |= Word{1} << bit;
  return word ^ mask;
}

}  // namespace flare
