// flare: bitstream generation/inspection, single trials, campaigns and reports.
//
// Exit status: 0 success, 1 usage error, 2 config/format error, 3 I/O error.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flare/flare.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kIo = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

flare::Word parse_hex_word(const std::string& text) {
  std::string digits = text;
  if (digits.starts_with("0x") || digits.starts_with("0X")) digits = digits.substr(2);
  flare::Word w = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), w, 16);
  if (digits.empty() || digits.size() > 8 || ec != std::errc{} || ptr != digits.data() + digits.size())
    throw UsageError("--force-far expects a 32-bit hex word, got '" + text + "'");
  return w;
}

void print_record(std::ostream& out, const flare::TrialRecord& r) {
  using flare::hex8;
  const auto stored = flare::unpack_far(r.far_stored);
  out << "trial: " << r.trial_index << "\n"
      << "seed: " << r.seed << "\n"
      << "bitstream: " << r.bitstream_name << "\n"
      << "outcome: " << to_string(r.outcome) << "\n"
      << "far_intended: " << hex8(r.far_intended) << "\n"
      << "far_stored: " << hex8(r.far_stored) << " (prr " << int{stored.prr_id} << ", frame "
      << stored.frame_offset << ")\n"
      << "flips:";
  for (const auto& f : r.flips) out << " " << f.word_index << ":" << int{f.bit};
  out << "\nvictims:";
  for (const auto& v : r.victims_hit) out << " " << v;
  const flare::FltSig sig{r.flt_sig};
  out << "\nflt_sig: " << r.flt_sig << " (0x" << hex8(r.flt_sig) << "; [9:0]=" << sig.cluster1()
      << " [19:10]=" << sig.cluster2() << ")\n"
      << "dos: " << (r.dos ? 1 : 0) << "\n"
      << "exposure_ns: " << r.exposure_ns << "\n"
      << "detected:";
  for (const auto& [name, hit] : r.detected) out << " " << name << "=" << (hit ? 1 : 0);
  out << "\nwaster_kind: " << to_string(r.waster_kind) << "\n";
}

int cmd_gen(const std::string& scenario_path, const std::string& out_path, const std::string& name) {
  const flare::PreparedScenario sc(flare::load_scenario(scenario_path));
  const auto& names = sc.config().bitstream.names;
  std::size_t idx = 0;
  if (!name.empty()) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw flare::ConfigError("scenario has no bitstream named '" + name + "'");
    idx = static_cast<std::size_t>(it - names.begin());
  }
  const auto& img = sc.images()[idx];
  flare::write_fbit(out_path, img.words);
  std::cout << "wrote " << out_path << " (" << names[idx] << ", " << img.words.size() << " words)\n";
  return kOk;
}

int cmd_inspect(const std::string& path, std::size_t frame_words) {
  const auto words = flare::read_fbit(path);
  const auto img = flare::parse_bitstream(words);
  const auto far = img.far();
  const auto stored = img.stored_crc();
  const auto computed = flare::compute_crc(img.payload_words());
  using flare::hex8;
  std::cout << "file: " << path << " (" << words.size() << " words)\n"
            << "header: [" << img.header_span.first << ", " << img.header_span.last << "] sync=0x"
            << hex8(img.words[0]) << " nops=" << img.header_span.size() - 1 << "\n"
            << "select: [" << img.far_marker_index << ", " << img.far_index << "] far=0x"
            << hex8(img.words[img.far_index]) << " (prr " << int{far.prr_id} << ", frame " << far.frame_offset
            << ")\n"
            << "data: [" << img.data_span.first << ", " << img.data_span.last
            << "] payload_words=" << img.payload.size();
  if (frame_words > 0) {
    std::cout << " frames=" << img.payload.size() / frame_words;
    if (img.payload.size() % frame_words) std::cout << " (partial frame)";
  }
  std::cout << "\n"
            << "crc: [" << img.crc_index << "] stored=0x" << hex8(stored) << " computed=0x" << hex8(computed)
            << "\n"
            << "CRC: " << (stored == computed ? "match" : "MISMATCH") << "\n";
  return kOk;
}

int cmd_run(const std::string& scenario_path, std::uint64_t seed, const std::string& force_far) {
  const flare::PreparedScenario sc(flare::load_scenario(scenario_path));
  flare::TrialOptions opts;
  if (!force_far.empty()) opts.forced_far = parse_hex_word(force_far);
  print_record(std::cout, flare::run_trial(sc, seed, 0, opts));
  return kOk;
}

int cmd_campaign(const std::string& scenario_path, std::uint64_t trials, std::uint64_t seed,
                 const std::string& out_path, const std::string& workers_text) {
  unsigned workers = 1;
  if (workers_text == "auto") {
    workers = 0;
  } else {
    auto [ptr, ec] = std::from_chars(workers_text.data(), workers_text.data() + workers_text.size(), workers);
    if (ec != std::errc{} || ptr != workers_text.data() + workers_text.size() || workers == 0)
      throw UsageError("--workers expects a positive integer or 'auto'");
  }
  const flare::PreparedScenario sc(flare::load_scenario(scenario_path));
  const auto records = flare::run_campaign(sc, seed, trials, workers);
  flare::write_file_atomic(out_path, flare::write_trial_csv(records));
  const auto s = flare::summarize(records);
  std::cerr << "wrote " << out_path << ": " << trials << " trials, misroute rate " << std::fixed
            << std::setprecision(3) << s.misroute_rate() << "\n";
  return kOk;
}

int cmd_report(const std::string& csv_path, const std::string& format) {
  const auto records = flare::parse_trial_csv(flare::read_file(csv_path));
  const auto fmt = format == "md" ? flare::ReportFormat::Markdown : flare::ReportFormat::Csv;
  std::cout << flare::render_report(flare::summarize(records), fmt);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FLARE attack simulator: bitstreams, reconfiguration trials and campaigns"};
  app.require_subcommand(1);

  std::string scenario, out, name, file, force_far, workers = "1", format = "csv";
  std::uint64_t seed = 0, trials = 0;
  std::size_t frame_words = 4;

  auto* gen = app.add_subcommand("gen", "write the scenario's bitstream as .fbit");
  gen->add_option("--scenario", scenario, "scenario INI file")->required();
  gen->add_option("--out", out, "output .fbit path")->required();
  gen->add_option("--name", name, "bitstream name from the scenario (default: first)");

  auto* inspect = app.add_subcommand("inspect", "dump the structure of a .fbit file");
  inspect->add_option("file", file, ".fbit file")->required();
  inspect->add_option("--frame-words", frame_words, "words per frame for the frame count");

  auto* run = app.add_subcommand("run", "run a single attack trial");
  run->add_option("--scenario", scenario, "scenario INI file")->required();
  run->add_option("--seed", seed, "master seed")->required();
  run->add_option("--force-far", force_far, "replace the FAR word with this hex value instead of injecting");

  auto* campaign = app.add_subcommand("campaign", "run a Monte Carlo campaign and write the trial log");
  campaign->add_option("--scenario", scenario, "scenario INI file")->required();
  campaign->add_option("--trials", trials, "number of trials (>= 1)")->required()->check(CLI::PositiveNumber);
  campaign->add_option("--seed", seed, "master seed")->required();
  campaign->add_option("--out", out, "output CSV path")->required();
  campaign->add_option("--workers", workers, "worker threads, or 'auto'");

  auto* report = app.add_subcommand("report", "summarize a trial log");
  report->add_option("csv", file, "trial log CSV")->required();
  report->add_option("--format", format, "csv or md")->check(CLI::IsMember({"csv", "md"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen(scenario, out, name);
    if (*inspect) return cmd_inspect(file, frame_words);
    if (*run) return cmd_run(scenario, seed, force_far);
    if (*campaign) return cmd_campaign(scenario, trials, seed, out, workers);
    if (*report) return cmd_report(file, format);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const flare::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kConfig;
  } catch (const flare::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const flare::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kConfig;
  } catch (const flare::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
