#pragma once

// Seeded Monte Carlo attack campaigns. Each trial builds a bitstream, plans
// the power-waster activation, pushes the words through the reconfiguration
// manager with the fault injector in the path, and records what happened to
// the fabric and the victims.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "flare/attacker.hpp"
#include "flare/bitstream.hpp"
#include "flare/fabric.hpp"
#include "flare/reconfig_manager.hpp"
#include "flare/scenario.hpp"
#include "flare/victims.hpp"

namespace flare {

enum class OutcomeClass : std::uint8_t { SuccessIntended, Misroute, CrcBlock, FormatBlock, AddrOorBlock };

inline constexpr std::size_t kOutcomeClassCount = 5;

constexpr std::string_view to_string(OutcomeClass c) noexcept {
  switch (c) {
    case OutcomeClass::SuccessIntended: return "SUCCESS_INTENDED";
    case OutcomeClass::Misroute: return "MISROUTE";
    case OutcomeClass::CrcBlock: return "CRC_BLOCK";
    case OutcomeClass::FormatBlock: return "FORMAT_BLOCK";
    case OutcomeClass::AddrOorBlock: return "ADDR_OOR_BLOCK";
  }
  return "UNKNOWN";
}

inline std::optional<OutcomeClass> outcome_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kOutcomeClassCount; ++i)
    if (to_string(static_cast<OutcomeClass>(i)) == s) return static_cast<OutcomeClass>(i);
  return std::nullopt;
}

inline OutcomeClass classify_outcome(FrameAddress intended, const RmOutcome& rm) {
  if (rm.final_state == RmState::Done)
    return rm.stored_image && rm.stored_image->far() == intended ? OutcomeClass::SuccessIntended
                                                                 : OutcomeClass::Misroute;
  switch (rm.block_reason.value_or(BlockReason::BadFormat)) {
    case BlockReason::CrcFail: return OutcomeClass::CrcBlock;
    case BlockReason::AddrOor: return OutcomeClass::AddrOorBlock;
    default: return OutcomeClass::FormatBlock;
  }
}

struct BitFlip {
  std::uint32_t word_index = 0;
  std::uint8_t bit = 0;
  friend bool operator==(const BitFlip&, const BitFlip&) = default;
};

struct TrialRecord {
  std::uint64_t trial_index = 0;
  std::uint64_t seed = 0;
  std::string bitstream_name;
  OutcomeClass outcome = OutcomeClass::SuccessIntended;
  Word far_intended = 0;
  Word far_stored = 0;
  std::vector<BitFlip> flips;
  std::vector<std::string> victims_hit;
  std::uint32_t flt_sig = 0;
  bool dos = false;
  std::int64_t exposure_ns = 0;
  std::vector<std::pair<std::string, bool>> detected;
  WasterKind waster_kind = WasterKind::CombinationalRo;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Order-independent per-trial seed.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
  return mix64(mix64(master_seed) + 0x9E3779B97F4A7C15ull * (trial_index + 1));
}

/// Synthetic frame payload for a named bitstream.
inline std::vector<Word> synthetic_payload(std::string_view name, std::size_t words) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : name) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  std::vector<Word> out(words);
  for (std::size_t i = 0; i < words; ++i) out[i] = static_cast<Word>(mix64(h + i) >> 16);
  return out;
}

/// Everything about a scenario that does not change between trials.
class PreparedScenario {
 public:
  explicit PreparedScenario(ScenarioConfig cfg)
      : cfg_((validate(cfg), std::move(cfg))), victims_(make_victims(cfg_)), golden_(cfg_.fabric) {
    golden_.lut_budget() = cfg_.lut_budget;
    p_bit_ = bit_flip_probability(cfg_.waster);
    const std::size_t words = cfg_.bitstream.payload_frames * cfg_.fabric.frame_words;
    for (const auto& name : cfg_.bitstream.names) {
      BuildSpec spec{cfg_.bitstream.intended_far, cfg_.bitstream.header_nops, synthetic_payload(name, words)};
      images_.push_back(build_bitstream(spec, cfg_.fabric.frame_words));
    }
    const auto& img = images_.front();
    if (cfg_.timing.mode == AttackMode::Flare) {
      plan_ = plan_activation(select_window(img), cfg_.timing.word_period, cfg_.timing.guard_words,
                              cfg_.timing.exposure);
    } else {
      // Continuous baseline: wasters run for the whole upload and every word
      // is exposed.
      plan_.target_word_span = {0, img.words.size() - 1};
      plan_.glitch_start = Nanos::zero();
      plan_.glitch_end = cfg_.timing.word_period * static_cast<std::int64_t>(img.words.size());
      plan_.activation_start = Nanos::zero();
      plan_.exposure = std::max(upload_duration(), plan_.glitch_end);
    }
  }

  const ScenarioConfig& config() const noexcept { return cfg_; }
  const VictimScenario& victims() const noexcept { return victims_; }
  const Fabric& golden_fabric() const noexcept { return golden_; }
  const BitstreamImage& image(std::uint64_t trial_index) const {
    return images_[trial_index % images_.size()];
  }
  const std::vector<BitstreamImage>& images() const noexcept { return images_; }
  double p_bit() const noexcept { return p_bit_; }
  const ActivationPlan& plan() const noexcept { return plan_; }

  /// Time to upload the full bitstream, using total_word_count when set.
  Nanos upload_duration() const {
    const std::uint64_t n = cfg_.timing.total_word_count.value_or(images_.front().words.size());
    return cfg_.timing.word_period * static_cast<std::int64_t>(n);
  }

 private:
  ScenarioConfig cfg_;
  VictimScenario victims_;
  Fabric golden_;
  std::vector<BitstreamImage> images_;
  double p_bit_ = 0.0;
  ActivationPlan plan_;
};

struct TrialOptions {
  std::optional<Word> forced_far;  // deterministic FAR rewrite instead of stochastic injection
};

/// Runs one attempt against `fabric`; the caller decides whether the fabric
/// is reset first.
inline TrialRecord run_trial(const PreparedScenario& sc, std::uint64_t master_seed, std::uint64_t trial_index,
                             Fabric& fabric, const TrialOptions& opts = {}) {
  const auto& cfg = sc.config();
  const BitstreamImage& img = sc.image(trial_index);
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.seed = trial_seed(master_seed, trial_index);
  rec.bitstream_name = cfg.bitstream.names[trial_index % cfg.bitstream.names.size()];
  rec.far_intended = pack_far(cfg.bitstream.intended_far);
  rec.exposure_ns = sc.plan().exposure.count();
  rec.waster_kind = cfg.waster.kind;

  FaultRng rng(rec.seed);
  const ActivationPlan& plan = sc.plan();
  const double p_bit = sc.p_bit();
  auto injector = [&](std::size_t i, Word w, Nanos t) -> Word {
    Word out = w;
    if (opts.forced_far) {
      if (i == img.far_index) out = *opts.forced_far;
    } else {
      out = inject(w, t, plan, p_bit, rng);
    }
    for (Word diff = out ^ w; diff != 0;) {
      const int bit = 31 - std::countl_zero(diff);
      rec.flips.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint8_t>(bit)});
      diff &= ~(Word{1} << bit);
    }
    return out;
  };

  ReconfigManager rm;
  const RmOutcome rm_out = rm.run_reconfiguration(img.words, injector, cfg.timing.word_period, fabric);
  rec.far_stored = img.far_index < rm_out.stored_words.size() ? rm_out.stored_words[img.far_index] : 0;
  rec.outcome = classify_outcome(cfg.bitstream.intended_far, rm_out);
  rec.dos = rec.outcome != OutcomeClass::SuccessIntended;

  const auto placements = victim_placements(sc.victims());
  const CorruptedUnits corrupted = fabric.diff_corrupted_units(placements);
  if (!corrupted.empty())
    for (const auto& p : placements)
      if (corrupted.contains(p.unit_id)) rec.victims_hit.push_back(p.unit_id);
  rec.flt_sig = evaluate_victims(sc.victims(), corrupted).value;

  for (const auto& d : cfg.detectors) rec.detected.emplace_back(d.name, sc.plan().exposure >= d.threshold);
  return rec;
}

/// Convenience form: a fresh golden fabric for a single trial.
inline TrialRecord run_trial(const PreparedScenario& sc, std::uint64_t master_seed, std::uint64_t trial_index,
                             const TrialOptions& opts = {}) {
  Fabric fabric = sc.golden_fabric();
  return run_trial(sc, master_seed, trial_index, fabric, opts);
}

/// Runs `trials` attempts. Records come back in trial order for any worker
/// count; workers == 0 means one per hardware thread. With
/// reset_between_trials off, corruption accumulates and trials run in order
/// on a single fabric.
inline std::vector<TrialRecord> run_campaign(const PreparedScenario& sc, std::uint64_t master_seed,
                                             std::uint64_t trials, unsigned workers = 1) {
  if (trials == 0) throw ConfigError("a campaign needs at least one trial");
  std::vector<TrialRecord> records(trials);

  if (!sc.config().reset_between_trials) {
    Fabric fabric = sc.golden_fabric();
    for (std::uint64_t i = 0; i < trials; ++i) records[i] = run_trial(sc, master_seed, i, fabric);
    return records;
  }

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, trials));

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    try {
      Fabric fabric = sc.golden_fabric();
      for (std::uint64_t i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) {
        fabric.reset_to_golden();
        records[i] = run_trial(sc, master_seed, i, fabric);
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next.store(trials);
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

// ---------------------------------------------------------------------------
// Aggregation

struct Summary {
  std::uint64_t trials = 0;
  std::array<std::uint64_t, kOutcomeClassCount> outcome_counts{};
  std::map<std::uint32_t, std::uint64_t> cluster1_hist;  // flt_sig[9:0] -> trials
  std::map<std::uint32_t, std::uint64_t> cluster2_hist;  // flt_sig[19:10] -> trials
  std::map<std::uint32_t, std::uint64_t> flt_sig_hist;
  std::map<std::string, std::uint64_t> unit_hits;  // unit id -> trials in which it was corrupted
  std::map<std::string, std::uint64_t> detections;
  std::map<std::string, std::uint64_t> by_bitstream;
  std::map<std::string, std::uint64_t> by_waster_kind;
  std::uint64_t dos_count = 0;
  std::uint64_t total_flips = 0;
  double mean_exposure_ns = 0.0;
  std::int64_t min_exposure_ns = 0;
  std::int64_t max_exposure_ns = 0;

  std::uint64_t count(OutcomeClass c) const noexcept { return outcome_counts[static_cast<std::size_t>(c)]; }
  double rate(OutcomeClass c) const noexcept {
    return trials ? static_cast<double>(count(c)) / static_cast<double>(trials) : 0.0;
  }
  double misroute_rate() const noexcept { return rate(OutcomeClass::Misroute); }
  double detection_rate(const std::string& detector) const {
    auto it = detections.find(detector);
    return trials && it != detections.end() ? static_cast<double>(it->second) / static_cast<double>(trials) : 0.0;
  }
  double mean_flips() const noexcept {
    return trials ? static_cast<double>(total_flips) / static_cast<double>(trials) : 0.0;
  }
};

inline Summary summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("cannot summarize an empty record set");
  Summary s;
  s.trials = records.size();
  s.min_exposure_ns = records.front().exposure_ns;
  s.max_exposure_ns = records.front().exposure_ns;
  long double exposure_sum = 0;
  for (const auto& r : records) {
    ++s.outcome_counts[static_cast<std::size_t>(r.outcome)];
    const FltSig sig{r.flt_sig};
    ++s.cluster1_hist[sig.cluster1()];
    ++s.cluster2_hist[sig.cluster2()];
    ++s.flt_sig_hist[r.flt_sig];
    for (const auto& u : r.victims_hit) ++s.unit_hits[u];
    for (const auto& [name, hit] : r.detected) {
      auto& n = s.detections[name];
      if (hit) ++n;
    }
    ++s.by_bitstream[r.bitstream_name];
    ++s.by_waster_kind[std::string(to_string(r.waster_kind))];
    if (r.dos) ++s.dos_count;
    s.total_flips += r.flips.size();
    exposure_sum += r.exposure_ns;
    s.min_exposure_ns = std::min(s.min_exposure_ns, r.exposure_ns);
    s.max_exposure_ns = std::max(s.max_exposure_ns, r.exposure_ns);
  }
  s.mean_exposure_ns = static_cast<double>(exposure_sum / static_cast<long double>(records.size()));
  return s;
}

}  // namespace flare
