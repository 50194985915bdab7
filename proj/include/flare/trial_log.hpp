#pragma once

// Trial-log CSV (one row per trial) and the report tables built from it.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flare/campaign.hpp"

namespace flare {

inline constexpr std::string_view kTrialCsvHeader =
    "trial,seed,bitstream,outcome,far_intended,far_stored,flips,victims,flt_sig,dos,exposure_ns,detected,waster_kind";

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string hex8(Word w) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", w);
  return buf;
}

inline void append_csv_row(std::string& out, const TrialRecord& r) {
  out += std::to_string(r.trial_index);
  out += ',';
  out += std::to_string(r.seed);
  out += ',';
  out += r.bitstream_name;
  out += ',';
  out += to_string(r.outcome);
  out += ',';
  out += hex8(r.far_intended);
  out += ',';
  out += hex8(r.far_stored);
  out += ',';
  for (std::size_t i = 0; i < r.flips.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(r.flips[i].word_index);
    out += ':';
    out += std::to_string(r.flips[i].bit);
  }
  out += ',';
  for (std::size_t i = 0; i < r.victims_hit.size(); ++i) {
    if (i) out += ';';
    out += r.victims_hit[i];
  }
  out += ',';
  out += std::to_string(r.flt_sig);
  out += ',';
  out += r.dos ? '1' : '0';
  out += ',';
  out += std::to_string(r.exposure_ns);
  out += ',';
  for (std::size_t i = 0; i < r.detected.size(); ++i) {
    if (i) out += ';';
    out += r.detected[i].first;
    out += r.detected[i].second ? "=1" : "=0";
  }
  out += ',';
  out += to_string(r.waster_kind);
  out += '\n';
}

inline std::string write_trial_csv(const std::vector<TrialRecord>& records) {
  std::string out(kTrialCsvHeader);
  out += '\n';
  out.reserve(records.size() * 120);
  for (const auto& r : records) append_csv_row(out, r);
  return out;
}

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_uint(std::string_view s, int base, std::size_t line, const char* field) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw SchemaError("line " + std::to_string(line) + ": bad " + field + " '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline std::vector<TrialRecord> parse_trial_csv(std::string_view text) {
  using detail::parse_uint;
  std::vector<TrialRecord> records;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty trial log");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrialCsvHeader) throw SchemaError("unexpected header: " + line);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 13) throw SchemaError("line " + std::to_string(lineno) + ": expected 13 fields");
    TrialRecord r;
    r.trial_index = parse_uint<std::uint64_t>(f[0], 10, lineno, "trial");
    r.seed = parse_uint<std::uint64_t>(f[1], 10, lineno, "seed");
    r.bitstream_name = f[2];
    auto outcome = outcome_from_string(f[3]);
    if (!outcome) throw SchemaError("line " + std::to_string(lineno) + ": bad outcome '" + f[3] + "'");
    r.outcome = *outcome;
    if (f[4].size() != 8 || f[5].size() != 8)
      throw SchemaError("line " + std::to_string(lineno) + ": far fields must be 8 hex digits");
    r.far_intended = parse_uint<Word>(f[4], 16, lineno, "far_intended");
    r.far_stored = parse_uint<Word>(f[5], 16, lineno, "far_stored");
    for (const auto& flip : detail::split(f[6], ';')) {
      const auto parts = detail::split(flip, ':');
      if (parts.size() != 2) throw SchemaError("line " + std::to_string(lineno) + ": bad flip '" + flip + "'");
      const auto bit = parse_uint<unsigned>(parts[1], 10, lineno, "flip bit");
      if (bit > 31) throw SchemaError("line " + std::to_string(lineno) + ": flip bit out of range");
      r.flips.push_back({parse_uint<std::uint32_t>(parts[0], 10, lineno, "flip word"), static_cast<std::uint8_t>(bit)});
    }
    r.victims_hit = detail::split(f[7], ';');
    r.flt_sig = parse_uint<std::uint32_t>(f[8], 10, lineno, "flt_sig");
    if (f[9] != "0" && f[9] != "1") throw SchemaError("line " + std::to_string(lineno) + ": bad dos");
    r.dos = f[9] == "1";
    r.exposure_ns = static_cast<std::int64_t>(parse_uint<std::uint64_t>(f[10], 10, lineno, "exposure_ns"));
    for (const auto& d : detail::split(f[11], ';')) {
      const auto eq = d.find('=');
      if (eq == std::string::npos || (d.substr(eq + 1) != "0" && d.substr(eq + 1) != "1"))
        throw SchemaError("line " + std::to_string(lineno) + ": bad detector entry '" + d + "'");
      r.detected.emplace_back(d.substr(0, eq), d.substr(eq + 1) == "1");
    }
    if (f[12] == "combinational_ro") r.waster_kind = WasterKind::CombinationalRo;
    else if (f[12] == "self_clocked_ro") r.waster_kind = WasterKind::SelfClockedRo;
    else throw SchemaError("line " + std::to_string(lineno) + ": bad waster_kind '" + f[12] + "'");
    records.push_back(std::move(r));
  }
  if (records.empty()) throw SchemaError("trial log has no rows");
  return records;
}

// ---------------------------------------------------------------------------
// Report

enum class ReportFormat { Csv, Markdown };

inline std::string render_report(const Summary& s, ReportFormat fmt) {
  std::ostringstream o;
  o.imbue(std::locale::classic());
  o << std::fixed << std::setprecision(3);
  const bool md = fmt == ReportFormat::Markdown;

  // Each table: a title, a header and rows of (key, count[, rate]).
  auto table = [&](const std::string& title, const std::string& key_name, const auto& rows, bool with_rate) {
    if (md) {
      o << "## " << title << "\n\n| " << key_name << " | count" << (with_rate ? " | rate" : "") << " |\n"
        << "|---|---:" << (with_rate ? "|---:" : "") << "|\n";
    } else {
      o << "# " << title << "\n" << key_name << ",count" << (with_rate ? ",rate" : "") << "\n";
    }
    for (const auto& [key, count] : rows) {
      const double rate = s.trials ? static_cast<double>(count) / static_cast<double>(s.trials) : 0.0;
      if (md) {
        o << "| " << key << " | " << count;
        if (with_rate) o << " | " << rate;
        o << " |\n";
      } else {
        o << key << "," << count;
        if (with_rate) o << "," << rate;
        o << "\n";
      }
    }
    o << "\n";
  };

  std::vector<std::pair<std::string, std::uint64_t>> outcomes;
  for (std::size_t i = 0; i < kOutcomeClassCount; ++i)
    outcomes.emplace_back(std::string(to_string(static_cast<OutcomeClass>(i))), s.outcome_counts[i]);
  outcomes.emplace_back("DOS", s.dos_count);
  table("outcomes (" + std::to_string(s.trials) + " trials)", "outcome", outcomes, true);

  std::vector<std::pair<std::string, std::uint64_t>> det;
  for (const auto& [name, n] : s.detections) det.emplace_back(name, n);
  table("detection", "detector", det, true);

  auto numbered = [](const auto& hist) {
    std::vector<std::pair<std::string, std::uint64_t>> rows;
    for (const auto& [k, n] : hist) rows.emplace_back(std::to_string(k), n);
    return rows;
  };
  table("cluster 1 fail index (flt_sig[9:0])", "field", numbered(s.cluster1_hist), false);
  table("cluster 2 fail index (flt_sig[19:10])", "field", numbered(s.cluster2_hist), false);
  table("flt_sig", "flt_sig", numbered(s.flt_sig_hist), false);
  std::vector<std::pair<std::string, std::uint64_t>> units(s.unit_hits.begin(), s.unit_hits.end());
  table("corrupted units", "unit", units, true);

  std::ostringstream mean;
  mean << std::fixed << std::setprecision(3) << s.mean_exposure_ns;
  std::vector<std::pair<std::string, std::string>> exposure = {{"mean_ns", mean.str()},
                                                               {"min_ns", std::to_string(s.min_exposure_ns)},
                                                               {"max_ns", std::to_string(s.max_exposure_ns)}};
  if (md) {
    o << "## exposure\n\n| stat | value |\n|---|---:|\n";
    for (const auto& [k, v] : exposure) o << "| " << k << " | " << v << " |\n";
  } else {
    o << "# exposure\nstat,value\n";
    for (const auto& [k, v] : exposure) o << k << "," << v << "\n";
  }
  return o.str();
}

}  // namespace flare
