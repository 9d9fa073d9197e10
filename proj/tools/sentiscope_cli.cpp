// sentiscope: command-line front end.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sentiscope/sentiscope.hpp"

namespace {

using namespace sentiscope;

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kUsageError = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string labels = "positive,negative,neutral";
  double tolerance = 1e-6;
  bool strict = false;
  std::string filter_source;
  std::string format = "json";
  int round = 2;
  std::string out;
};

void add_input_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--labels", o.labels, "Comma-separated label order")->capture_default_str();
  cmd->add_option("--tolerance", o.tolerance, "Allowed deviation of probability sums from 1")
      ->capture_default_str();
  cmd->add_flag("--strict", o.strict, "Abort on the first invalid line");
  cmd->add_option("--filter-source", o.filter_source, "Keep only records with this source tag");
}

void add_output_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--round", o.round, "Decimal places in reports (negative: full precision)")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "Output file (default: stdout)");
}

LabelSpace parse_labels(const std::string& csv) {
  std::vector<std::string> names;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    names.push_back(first == std::string::npos ? std::string{} : item.substr(first, last - first + 1));
  }
  try {
    return LabelSpace(std::move(names));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--labels: ") + e.what());
  }
}

ReportStyle style_of(const CommonOptions& o) {
  return {o.format == "csv" ? ReportFormat::csv : ReportFormat::json, o.round};
}

Corpus load_corpus(const std::string& path, const CommonOptions& o, const std::string& source_filter) {
  const auto labels = parse_labels(o.labels);
  auto result = load(std::filesystem::path(path), labels, {.tolerance = o.tolerance, .strict = o.strict});
  if (result.report.rejected > 0)
    std::cerr << "warning: " << path << ": " << result.report.rejected << " invalid line(s) skipped\n";
  if (!source_filter.empty()) return result.corpus.with_source(source_filter);
  return result.corpus;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot write '" + out + "'");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transparency diagnostics for aspect-based sentiment model outputs"};
  app.set_config("--config", "", "Read option defaults from a TOML/INI file");
  app.require_subcommand(1);
  app.set_version_flag("--version", "sentiscope 0.1.0");

  std::function<int()> action;

  // validate -----------------------------------------------------------------
  CommonOptions validate_opts;
  validate_opts.format = "text";
  std::string validate_input;
  auto* validate_cmd = app.add_subcommand("validate", "Check a record file and report rejections");
  validate_cmd->add_option("--input", validate_input, "Record file")->required();
  add_input_options(validate_cmd, validate_opts);
  validate_cmd->add_option("--format", validate_opts.format, "Report format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  validate_cmd->add_option("--out", validate_opts.out, "Output file (default: stdout)");
  validate_cmd->callback([&] {
    action = [&]() -> int {
      const auto labels = parse_labels(validate_opts.labels);
      try {
        const auto result = load(std::filesystem::path(validate_input), labels,
                                 {.tolerance = validate_opts.tolerance, .strict = validate_opts.strict});
        std::optional<ReportFormat> fmt;
        if (validate_opts.format == "json") fmt = ReportFormat::json;
        if (validate_opts.format == "csv") fmt = ReportFormat::csv;
        emit(export_ingest_report(result.report, fmt), validate_opts.out);
        return result.report.rejected == 0 ? kOk : kValidationFailure;
      } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidationFailure;
      }
    };
  });

  // profile ------------------------------------------------------------------
  CommonOptions profile_opts;
  std::string profile_input;
  std::size_t profile_top_k = 10;
  std::size_t profile_min_count = 1;
  auto* profile_cmd = app.add_subcommand("profile", "Per-aspect frequency, mode, confidence, dominance and entropy");
  profile_cmd->add_option("--input", profile_input, "Record file")->required();
  profile_cmd->add_option("--top-k", profile_top_k, "Most frequent aspects to report (0: all)")->capture_default_str();
  profile_cmd->add_option("--min-count", profile_min_count, "Hide aspects with fewer records")->capture_default_str();
  add_input_options(profile_cmd, profile_opts);
  add_output_options(profile_cmd, profile_opts);
  profile_cmd->callback([&] {
    action = [&]() -> int {
      const Corpus corpus = load_corpus(profile_input, profile_opts, profile_opts.filter_source);
      const auto profiles = profile_corpus(corpus, {.min_count = profile_min_count, .top_k = profile_top_k});
      emit(export_profiles(profiles, corpus.label_space(), style_of(profile_opts)), profile_opts.out);
      return kOk;
    };
  });

  // compare ------------------------------------------------------------------
  CommonOptions compare_opts;
  std::string compare_a, compare_b, source_a, source_b;
  std::size_t compare_top_k = 10;
  std::size_t compare_min_count = 1;
  auto* compare_cmd = app.add_subcommand("compare", "Per-aspect Jensen-Shannon divergence between two sources");
  compare_cmd->add_option("--input-a", compare_a, "Record file for side A")->required();
  compare_cmd->add_option("--input-b", compare_b, "Record file for side B (default: same as A)");
  compare_cmd->add_option("--source-a", source_a, "Source tag selecting side A records");
  compare_cmd->add_option("--source-b", source_b, "Source tag selecting side B records");
  compare_cmd->add_option("--top-k", compare_top_k, "Shared aspects to report (0: all)")->capture_default_str();
  compare_cmd->add_option("--min-count", compare_min_count, "Minimum records per side")->capture_default_str();
  add_input_options(compare_cmd, compare_opts);
  add_output_options(compare_cmd, compare_opts);
  compare_cmd->callback([&] {
    action = [&]() -> int {
      auto pick = [&](const std::string& specific) {
        return specific.empty() ? compare_opts.filter_source : specific;
      };
      const Corpus a = load_corpus(compare_a, compare_opts, pick(source_a));
      const Corpus b = load_corpus(compare_b.empty() ? compare_a : compare_b, compare_opts, pick(source_b));
      const auto rows = compare_sources(a, b, {.top_k = compare_top_k, .min_count = compare_min_count});
      emit(export_divergence(rows, a.label_space(), style_of(compare_opts)), compare_opts.out);
      return kOk;
    };
  });

  // sweep --------------------------------------------------------------------
  CommonOptions sweep_opts;
  std::string sweep_input;
  std::vector<double> thresholds = kDefaultThresholds;
  std::size_t sweep_top_k = 10;
  std::string weighting = "aspect";
  auto* sweep_cmd = app.add_subcommand("sweep", "Recompute indicators under increasing confidence thresholds");
  sweep_cmd->add_option("--input", sweep_input, "Record file")->required();
  sweep_cmd->add_option("--thresholds", thresholds, "Ascending thresholds in [0, 1]")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--top-k", sweep_top_k, "Ranking depth for stability")->capture_default_str();
  sweep_cmd->add_option("--weighting", weighting, "Mean over aspects or over records")
      ->check(CLI::IsMember({"aspect", "record"}))
      ->capture_default_str();
  add_input_options(sweep_cmd, sweep_opts);
  add_output_options(sweep_cmd, sweep_opts);
  sweep_cmd->callback([&] {
    action = [&]() -> int {
      const Corpus corpus = load_corpus(sweep_input, sweep_opts, sweep_opts.filter_source);
      std::vector<SweepResult> rows;
      try {
        rows = confidence_sweep(corpus, thresholds,
                                {.top_k = sweep_top_k,
                                 .weighting = weighting == "record" ? SweepWeighting::per_record
                                                                    : SweepWeighting::per_aspect});
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--thresholds: ") + e.what());
      }
      std::vector<RankingShift> shifts;
      if (rows.size() >= 2) shifts = ranking_stability(rows, sweep_top_k);
      emit(export_sweep(rows, shifts, corpus.label_space(), style_of(sweep_opts)), sweep_opts.out);
      return kOk;
    };
  });

  // bootstrap ----------------------------------------------------------------
  CommonOptions boot_opts;
  std::string boot_input;
  BootstrapReportOptions boot;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Percentile bootstrap intervals for entropy and dominance");
  boot_cmd->add_option("--input", boot_input, "Record file")->required();
  boot_cmd->add_option("--threshold", boot.threshold, "Confidence filter applied first")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  boot_cmd->add_option("--top-k", boot.top_k, "Most frequent aspects to bootstrap (0: all)")->capture_default_str();
  boot_cmd->add_option("--replicates", boot.bootstrap.replicates, "Bootstrap replicates B")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  boot_cmd->add_option("--ci", boot.bootstrap.ci_level, "Interval level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  boot_cmd->add_option("--seed", boot.bootstrap.seed, "Random seed")->capture_default_str();
  boot.bootstrap.threads = 0;
  boot_cmd->add_option("--threads", boot.bootstrap.threads, "Worker threads (0: all cores)")->capture_default_str();
  add_input_options(boot_cmd, boot_opts);
  add_output_options(boot_cmd, boot_opts);
  boot_cmd->callback([&] {
    action = [&]() -> int {
      if (!(boot.bootstrap.ci_level > 0.0 && boot.bootstrap.ci_level < 1.0))
        throw UsageError("--ci must lie strictly between 0 and 1");
      const Corpus corpus = load_corpus(boot_input, boot_opts, boot_opts.filter_source);
      emit(export_bootstrap(bootstrap_report(corpus, boot), style_of(boot_opts)), boot_opts.out);
      return kOk;
    };
  });

  // monitor ------------------------------------------------------------------
  CommonOptions mon_opts;
  std::string mon_input, mon_window, mon_step, mon_baseline;
  double alert_jsd = 0.0;
  std::size_t mon_min_count = 5;
  auto* mon_cmd = app.add_subcommand("monitor", "Windowed drift indicators and JSD alerts");
  mon_cmd->add_option("--input", mon_input, "Timestamped record file")->required();
  mon_cmd->add_option("--window", mon_window, "Window width, e.g. 7d, 12h, 3600")->required();
  mon_cmd->add_option("--step", mon_step, "Window step (default: the width)");
  mon_cmd->add_option("--baseline-window", mon_baseline,
                      "Fixed baseline: 'first' or START/END in ISO-8601 UTC");
  mon_cmd->add_option("--alert-jsd", alert_jsd, "Alert when JSD exceeds this value")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  mon_cmd->add_option("--min-count", mon_min_count, "Records needed on both sides to alert")->capture_default_str();
  add_input_options(mon_cmd, mon_opts);
  add_output_options(mon_cmd, mon_opts);
  mon_cmd->callback([&] {
    action = [&]() -> int {
      const auto width = parse_duration(mon_window);
      const auto step = mon_step.empty() ? width : parse_duration(mon_step);
      if (!width || !step) throw UsageError("invalid --window or --step duration");
      const WindowSpec spec{*width, *step};
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const Corpus corpus = load_corpus(mon_input, mon_opts, mon_opts.filter_source);
      DriftOptions opts{.alert_jsd = alert_jsd, .min_count = mon_min_count, .threads = 0};
      if (mon_baseline == "first") {
        const auto wins = windows(corpus, spec);
        if (!wins.empty()) opts.baseline = wins.front().records;
      } else if (!mon_baseline.empty()) {
        const auto slash = mon_baseline.find('/');
        const auto lo = slash == std::string::npos ? std::nullopt : parse_timestamp(mon_baseline.substr(0, slash));
        const auto hi = slash == std::string::npos ? std::nullopt : parse_timestamp(mon_baseline.substr(slash + 1));
        if (!lo || !hi) throw UsageError("--baseline-window must be 'first' or START/END");
        opts.baseline = corpus.filter([&](const PredictionRecord& r) {
          return r.timestamp && *r.timestamp >= *lo && *r.timestamp < *hi;
        });
      }
      emit(export_drift(drift_series(corpus, spec, opts), corpus.label_space(), style_of(mon_opts)), mon_opts.out);
      return kOk;
    };
  });

  // synth --------------------------------------------------------------------
  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic record file from an aspect spec");
  synth_cmd->add_option("--spec", synth_spec, "JSON spec document")->required();
  synth_cmd->add_option("--seed", synth_seed, "Random seed (overrides the seed in the spec file)");
  synth_cmd->add_option("--out", synth_out, "Output file (default: stdout)");
  synth_cmd->callback([&] {
    action = [&]() -> int {
      std::ifstream in(synth_spec);
      if (!in) throw IoError("cannot open '" + synth_spec + "'");
      SynthConfig cfg;
      try {
        cfg = parse_synth_config(nlohmann::json::parse(in));
      } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("synth spec: ") + e.what());
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const Corpus corpus = generate(cfg.aspects, cfg.labels, synth_seed.value_or(cfg.seed.value_or(0)));
      emit(write_records(corpus), synth_out);
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    return action ? action() : kUsageError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
}
