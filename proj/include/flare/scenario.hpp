#pragma once

// Scenario configuration: fabric geometry, victim layout, power-waster
// parameters, attack timing, bitstream shape and detectors. Stored as an
// INI file with one section per concern.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "flare/attacker.hpp"
#include "flare/fabric.hpp"
#include "flare/io.hpp"
#include "flare/victims.hpp"

namespace flare {

enum class VictimKind { Adders, Aes };
enum class AttackMode { Flare, Continuous };

struct DetectorModel {
  std::string name;
  Nanos threshold{0};
};

struct TimingConfig {
  Nanos word_period{10};
  Nanos exposure{200'000};
  std::size_t guard_words = 4;
  AttackMode mode = AttackMode::Flare;
  std::optional<std::uint64_t> total_word_count;  // upload length used for duration arithmetic
};

struct BitstreamConfig {
  FrameAddress intended_far{1, 0};
  std::size_t header_nops = 2;
  std::size_t payload_frames = 2;
  std::vector<std::string> names{"blinkall", "blinkcount", "blinkline"};
};

struct ScenarioConfig {
  FabricGeometry fabric;
  VictimKind victim_kind = VictimKind::Adders;
  AdderLayout adders;
  AesLayout aes = default_aes_layout();
  PowerWasterConfig waster;
  TimingConfig timing;
  BitstreamConfig bitstream;
  std::vector<DetectorModel> detectors{{"ro_monitor", Nanos{1'000'000}}};
  bool reset_between_trials = true;
  std::map<std::string, double> lut_budget{
      {"adders_and_encoders", 21.2}, {"aes_pair", 38.6}};
};

inline VictimScenario make_victims(const ScenarioConfig& cfg) {
  if (cfg.victim_kind == VictimKind::Adders) return AdderScenario(cfg.adders);
  return AesScenario(cfg.aes);
}

/// Rejects configurations whose parts do not fit together.
inline void validate(const ScenarioConfig& cfg) {
  const auto& g = cfg.fabric;
  if (g.prr_count == 0 || g.prr_count > 256) throw ConfigError("prr_count must be in 1..256");
  if (g.frames_per_prr == 0 || g.frames_per_prr > (std::size_t{1} << 24))
    throw ConfigError("frames_per_prr must be in 1..2^24");
  if (g.frame_words == 0) throw ConfigError("frame_words must be positive");
  cfg.waster.validate();
  if (cfg.timing.word_period <= Nanos::zero()) throw ConfigError("word_period_ns must be positive");
  if (cfg.timing.exposure <= Nanos::zero()) throw ConfigError("exposure_ns must be positive");
  if (cfg.timing.total_word_count && *cfg.timing.total_word_count == 0)
    throw ConfigError("total_word_count must be positive");

  const auto& bs = cfg.bitstream;
  if (bs.intended_far.prr_id >= g.prr_count || bs.intended_far.frame_offset >= g.frames_per_prr)
    throw ConfigError("intended frame address is outside the fabric");
  if (bs.payload_frames == 0) throw ConfigError("payload_frames must be positive");
  if (bs.payload_frames * g.frame_words > kMaxPayloadWords) throw ConfigError("payload too large for the format");
  if (bs.header_nops > kMaxHeaderNops) throw ConfigError("header_nops exceeds bound");
  if (bs.names.empty()) throw ConfigError("bitstream name list is empty");
  for (const auto& n : bs.names)
    if (n.empty() || n.find_first_of(",;=\n\r\" ") != std::string::npos)
      throw ConfigError("invalid bitstream name '" + n + "'");

  std::set<std::string> seen;
  for (const auto& d : cfg.detectors) {
    if (d.threshold <= Nanos::zero()) throw ConfigError("detector threshold must be positive");
    if (d.name.empty() || d.name.find_first_of(",;=\n\r\" ") != std::string::npos || !seen.insert(d.name).second)
      throw ConfigError("invalid or duplicate detector name '" + d.name + "'");
  }

  if (cfg.victim_kind == VictimKind::Adders && (cfg.adders.n == 0 || cfg.adders.n > kFieldMask))
    throw ConfigError("adder count must be in 1..1023");

  VictimScenario victims = [&]() -> VictimScenario {
    try {
      return make_victims(cfg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  auto placements = victim_placements(victims);
  for (const auto& p : placements)
    if (p.prr_id >= g.prr_count || p.first_frame > p.last_frame || p.last_frame >= g.frames_per_prr)
      throw ConfigError("placement of " + p.unit_id + " does not fit the fabric");

  std::vector<Placement> sorted(placements.begin(), placements.end());
  std::sort(sorted.begin(), sorted.end(), [](const Placement& a, const Placement& b) {
    return a.prr_id != b.prr_id ? a.prr_id < b.prr_id : a.first_frame < b.first_frame;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i - 1].overlaps(sorted[i]))
      throw ConfigError("placements of " + sorted[i - 1].unit_id + " and " + sorted[i].unit_id + " overlap");

  const auto last_intended = std::min<std::size_t>(bs.intended_far.frame_offset + bs.payload_frames - 1,
                                                   g.frames_per_prr - 1);
  const Placement intended{"intended", bs.intended_far.prr_id, bs.intended_far.frame_offset,
                           static_cast<std::uint32_t>(last_intended)};
  for (const auto& p : placements)
    if (p.overlaps(intended))
      throw ConfigError("victim " + p.unit_id + " overlaps the intended configuration region");
}

// ---------------------------------------------------------------------------
// INI encoding

namespace detail {

template <typename T>
T ini_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) in >> std::hex;
  T value{};
  in >> value;
  if (!in || !(in >> std::ws).eof()) throw ConfigError("bad value for " + key + ": '" + text + "'");
  if constexpr (std::is_unsigned_v<T>)
    if (text.find('-') != std::string::npos) throw ConfigError("negative value for " + key);
  return value;
}

inline bool ini_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + text + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(item);
  }
  return out;
}

inline std::uint8_t ini_u8(const std::string& key, const std::string& text) {
  const auto v = ini_number<std::uint32_t>(key, text);
  if (v > 255) throw ConfigError(key + " must be below 256");
  return static_cast<std::uint8_t>(v);
}

inline std::string hex_block(const aes::Block& b) { return aes::to_hex(b); }

inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace detail

inline ScenarioConfig parse_scenario(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }

  ScenarioConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  using namespace detail;
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"fabric",
       {{"prr_count", [&](auto& k, auto& v) { cfg.fabric.prr_count = ini_number<std::size_t>(k, v); }},
        {"frames_per_prr", [&](auto& k, auto& v) { cfg.fabric.frames_per_prr = ini_number<std::size_t>(k, v); }},
        {"frame_words", [&](auto& k, auto& v) { cfg.fabric.frame_words = ini_number<std::size_t>(k, v); }}}},
      {"victims",
       {{"kind",
         [&](auto& k, auto& v) {
           if (v == "adders") cfg.victim_kind = VictimKind::Adders;
           else if (v == "aes") cfg.victim_kind = VictimKind::Aes;
           else throw ConfigError("bad value for " + k + ": '" + v + "'");
         }},
        {"n", [&](auto& k, auto& v) { cfg.adders.n = ini_number<std::size_t>(k, v); }},
        {"cluster1_prr", [&](auto& k, auto& v) { cfg.adders.cluster1_prr = ini_u8(k, v); }},
        {"cluster1_first_frame",
         [&](auto& k, auto& v) { cfg.adders.cluster1_first_frame = ini_number<std::uint32_t>(k, v); }},
        {"cluster2_prr", [&](auto& k, auto& v) { cfg.adders.cluster2_prr = ini_u8(k, v); }},
        {"cluster2_first_frame",
         [&](auto& k, auto& v) { cfg.adders.cluster2_first_frame = ini_number<std::uint32_t>(k, v); }},
        {"frames_per_adder",
         [&](auto& k, auto& v) { cfg.adders.frames_per_adder = ini_number<std::uint32_t>(k, v); }},
        {"encoder1_prr", [&](auto& k, auto& v) { cfg.adders.encoder1_prr = ini_u8(k, v); }},
        {"encoder1_first_frame",
         [&](auto& k, auto& v) { cfg.adders.encoder1_first_frame = ini_number<std::uint32_t>(k, v); }},
        {"encoder2_prr", [&](auto& k, auto& v) { cfg.adders.encoder2_prr = ini_u8(k, v); }},
        {"encoder2_first_frame",
         [&](auto& k, auto& v) { cfg.adders.encoder2_first_frame = ini_number<std::uint32_t>(k, v); }},
        {"frames_per_encoder",
         [&](auto& k, auto& v) { cfg.adders.frames_per_encoder = ini_number<std::uint32_t>(k, v); }},
        {"aes_key",
         [&](auto& k, auto& v) {
           auto b = aes::block_from_hex(v);
           if (!b) throw ConfigError(k + " must be 32 hex digits");
           cfg.aes.key = *b;
         }},
        {"aes_plaintext",
         [&](auto& k, auto& v) {
           auto b = aes::block_from_hex(v);
           if (!b) throw ConfigError(k + " must be 32 hex digits");
           cfg.aes.plaintext = *b;
         }},
        {"aes1_prr", [&](auto& k, auto& v) { cfg.aes.aes1.prr_id = ini_u8(k, v); }},
        {"aes1_first_frame", [&](auto& k, auto& v) { cfg.aes.aes1.first_frame = ini_number<std::uint32_t>(k, v); }},
        {"aes1_last_frame", [&](auto& k, auto& v) { cfg.aes.aes1.last_frame = ini_number<std::uint32_t>(k, v); }},
        {"aes2_prr", [&](auto& k, auto& v) { cfg.aes.aes2.prr_id = ini_u8(k, v); }},
        {"aes2_first_frame", [&](auto& k, auto& v) { cfg.aes.aes2.first_frame = ini_number<std::uint32_t>(k, v); }},
        {"aes2_last_frame",
         [&](auto& k, auto& v) { cfg.aes.aes2.last_frame = ini_number<std::uint32_t>(k, v); }}}},
      {"power_waster",
       {{"kind",
         [&](auto& k, auto& v) {
           if (v == "combinational_ro") cfg.waster.kind = WasterKind::CombinationalRo;
           else if (v == "self_clocked_ro") cfg.waster.kind = WasterKind::SelfClockedRo;
           else throw ConfigError("bad value for " + k + ": '" + v + "'");
         }},
        {"count", [&](auto& k, auto& v) { cfg.waster.count = ini_number<std::uint32_t>(k, v); }},
        {"toggle_freq_hz", [&](auto& k, auto& v) { cfg.waster.toggle_freq_hz = ini_number<double>(k, v); }},
        {"duty", [&](auto& k, auto& v) { cfg.waster.duty = ini_number<double>(k, v); }},
        {"p_max", [&](auto& k, auto& v) { cfg.waster.p_max = ini_number<double>(k, v); }}}},
      {"timing",
       {{"word_period_ns", [&](auto& k, auto& v) { cfg.timing.word_period = Nanos{ini_number<std::int64_t>(k, v)}; }},
        {"exposure_ns", [&](auto& k, auto& v) { cfg.timing.exposure = Nanos{ini_number<std::int64_t>(k, v)}; }},
        {"guard_words", [&](auto& k, auto& v) { cfg.timing.guard_words = ini_number<std::size_t>(k, v); }},
        {"mode",
         [&](auto& k, auto& v) {
           if (v == "flare") cfg.timing.mode = AttackMode::Flare;
           else if (v == "continuous") cfg.timing.mode = AttackMode::Continuous;
           else throw ConfigError("bad value for " + k + ": '" + v + "'");
         }},
        {"total_word_count",
         [&](auto& k, auto& v) { cfg.timing.total_word_count = ini_number<std::uint64_t>(k, v); }}}},
      {"bitstream",
       {{"far_prr", [&](auto& k, auto& v) { cfg.bitstream.intended_far.prr_id = ini_u8(k, v); }},
        {"far_offset",
         [&](auto& k, auto& v) {
           const auto off = ini_number<std::uint32_t>(k, v);
           if (off > kFrameOffsetMask) throw ConfigError(k + " exceeds 24 bits");
           cfg.bitstream.intended_far.frame_offset = off;
         }},
        {"header_nops", [&](auto& k, auto& v) { cfg.bitstream.header_nops = ini_number<std::size_t>(k, v); }},
        {"payload_frames", [&](auto& k, auto& v) { cfg.bitstream.payload_frames = ini_number<std::size_t>(k, v); }},
        {"names", [&](auto&, auto& v) { cfg.bitstream.names = split_list(v); }}}},
      {"campaign",
       {{"reset_between_trials", [&](auto& k, auto& v) { cfg.reset_between_trials = ini_bool(k, v); }}}},
  };

  bool detectors_given = false;
  for (const auto& [section, body] : tree) {
    if (section == "detectors") {
      if (!detectors_given) cfg.detectors.clear();
      detectors_given = true;
      for (const auto& [name, value] : body)
        cfg.detectors.push_back({name, Nanos{ini_number<std::int64_t>("detectors." + name, value.data())}});
      continue;
    }
    if (section == "lut_budget") {
      cfg.lut_budget.clear();
      for (const auto& [name, value] : body) cfg.lut_budget[name] = ini_number<double>(name, value.data());
      continue;
    }
    auto sec = schema.find(section);
    if (sec == schema.end() || body.data() != "")
      throw ConfigError("unknown scenario section or top-level key '" + section + "'");
    for (const auto& [key, value] : body) {
      auto setter = sec->second.find(key);
      if (setter == sec->second.end()) throw ConfigError("unknown key " + section + "." + key);
      setter->second(section + "." + key, value.data());
    }
  }
  validate(cfg);
  return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

/// Renders a complete scenario file that parses back to `cfg`.
inline std::string to_ini(const ScenarioConfig& cfg) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  using detail::format_double;
  o << "[fabric]\n"
    << "prr_count=" << cfg.fabric.prr_count << "\n"
    << "frames_per_prr=" << cfg.fabric.frames_per_prr << "\n"
    << "frame_words=" << cfg.fabric.frame_words << "\n\n";
  o << "[victims]\n"
    << "kind=" << (cfg.victim_kind == VictimKind::Adders ? "adders" : "aes") << "\n";
  if (cfg.victim_kind == VictimKind::Adders) {
    const auto& a = cfg.adders;
    o << "n=" << a.n << "\n"
      << "cluster1_prr=" << int{a.cluster1_prr} << "\n"
      << "cluster1_first_frame=" << a.cluster1_first_frame << "\n"
      << "cluster2_prr=" << int{a.cluster2_prr} << "\n"
      << "cluster2_first_frame=" << a.cluster2_first_frame << "\n"
      << "frames_per_adder=" << a.frames_per_adder << "\n"
      << "encoder1_prr=" << int{a.encoder1_prr} << "\n"
      << "encoder1_first_frame=" << a.encoder1_first_frame << "\n"
      << "encoder2_prr=" << int{a.encoder2_prr} << "\n"
      << "encoder2_first_frame=" << a.encoder2_first_frame << "\n"
      << "frames_per_encoder=" << a.frames_per_encoder << "\n\n";
  } else {
    const auto& a = cfg.aes;
    o << "aes_key=" << detail::hex_block(a.key) << "\n"
      << "aes_plaintext=" << detail::hex_block(a.plaintext) << "\n"
      << "aes1_prr=" << int{a.aes1.prr_id} << "\n"
      << "aes1_first_frame=" << a.aes1.first_frame << "\n"
      << "aes1_last_frame=" << a.aes1.last_frame << "\n"
      << "aes2_prr=" << int{a.aes2.prr_id} << "\n"
      << "aes2_first_frame=" << a.aes2.first_frame << "\n"
      << "aes2_last_frame=" << a.aes2.last_frame << "\n\n";
  }
  o << "[power_waster]\n"
    << "kind=" << to_string(cfg.waster.kind) << "\n"
    << "count=" << cfg.waster.count << "\n"
    << "toggle_freq_hz=" << format_double(cfg.waster.toggle_freq_hz) << "\n"
    << "duty=" << format_double(cfg.waster.duty) << "\n"
    << "p_max=" << format_double(cfg.waster.p_max) << "\n\n";
  o << "[timing]\n"
    << "word_period_ns=" << cfg.timing.word_period.count() << "\n"
    << "exposure_ns=" << cfg.timing.exposure.count() << "\n"
    << "guard_words=" << cfg.timing.guard_words << "\n"
    << "mode=" << (cfg.timing.mode == AttackMode::Flare ? "flare" : "continuous") << "\n";
  if (cfg.timing.total_word_count) o << "total_word_count=" << *cfg.timing.total_word_count << "\n";
  o << "\n[bitstream]\n"
    << "far_prr=" << int{cfg.bitstream.intended_far.prr_id} << "\n"
    << "far_offset=" << cfg.bitstream.intended_far.frame_offset << "\n"
    << "header_nops=" << cfg.bitstream.header_nops << "\n"
    << "payload_frames=" << cfg.bitstream.payload_frames << "\n"
    << "names=";
  for (std::size_t i = 0; i < cfg.bitstream.names.size(); ++i) o << (i ? "," : "") << cfg.bitstream.names[i];
  o << "\n\n[detectors]\n";
  for (const auto& d : cfg.detectors) o << d.name << "=" << d.threshold.count() << "\n";
  o << "\n[campaign]\n"
    << "reset_between_trials=" << (cfg.reset_between_trials ? "true" : "false") << "\n";
  o << "\n[lut_budget]\n";
  for (const auto& [label, pct] : cfg.lut_budget) o << label << "=" << format_double(pct) << "\n";
  return o.str();
}

/// The adder setup: 500 adders per cluster, 8 PRRs, 16000 ROs at 500 kHz,
/// 200 us exposure, 10 ns word period, 4M-word full upload.
inline ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  cfg.timing.total_word_count = 4'000'000;
  return cfg;
}

inline ScenarioConfig default_aes_scenario() {
  ScenarioConfig cfg = default_scenario();
  cfg.victim_kind = VictimKind::Aes;
  return cfg;
}

}  // namespace flare
