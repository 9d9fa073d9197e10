#pragma once

// Serialization of computed reports as CSV tables or JSON documents.
// Rounding happens here and nowhere else.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sentiscope/divergence.hpp"
#include "sentiscope/drift.hpp"
#include "sentiscope/ingestion.hpp"
#include "sentiscope/metrics.hpp"
#include "sentiscope/robustness.hpp"

namespace sentiscope {

enum class ReportFormat { csv, json };

struct ReportStyle {
  ReportFormat format = ReportFormat::json;
  int decimals = 2;  // negative: full precision
};

namespace detail {

inline double round_to(double x, int decimals) {
  if (decimals < 0 || !std::isfinite(x)) return x;
  const double scale = std::pow(10.0, decimals);
  const double r = std::round(x * scale) / scale;
  return r == 0.0 ? 0.0 : r;  // no "-0.00"
}

inline std::string format_number(double x, int decimals) {
  char buf[64];
  if (decimals < 0) {
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  }
  const auto res = std::to_chars(buf, buf + sizeof buf, round_to(x, decimals), std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::optional<double> x, int decimals) {
  return x ? format_number(*x, decimals) : std::string{};
}

inline nlohmann::ordered_json json_number(double x, int decimals) { return round_to(x, decimals); }

inline nlohmann::ordered_json json_number(std::optional<double> x, int decimals) {
  return x ? nlohmann::ordered_json(round_to(*x, decimals)) : nlohmann::ordered_json(nullptr);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(int decimals) : decimals_(decimals) {}

  CsvWriter& text(std::string_view s) { return cell(csv_field(s)); }
  CsvWriter& num(double x) { return cell(format_number(x, decimals_)); }
  CsvWriter& num(std::optional<double> x) { return cell(format_number(x, decimals_)); }
  CsvWriter& count(std::size_t n) { return cell(std::to_string(n)); }
  CsvWriter& flag(bool b) { return cell(b ? "true" : "false"); }

  CsvWriter& header(std::initializer_list<std::string_view> names) {
    for (auto n : names) text(n);
    return end_row();
  }

  CsvWriter& end_row() {
    os_ << '\n';
    first_ = true;
    return *this;
  }

  std::string str() const { return os_.str(); }

 private:
  CsvWriter& cell(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }

  std::ostringstream os_;
  int decimals_;
  bool first_ = true;
};

inline std::string dump(const nlohmann::ordered_json& j) {
  return j.dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Aspect profiles
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json profile_to_json(const AspectProfile& p, const LabelSpace& labels, int decimals) {
  using detail::json_number;
  nlohmann::ordered_json j;
  j["aspect"] = p.aspect_key;
  j["n"] = p.n;
  j["freq_pct"] = json_number(100.0 * p.frequency_share, decimals);
  j["sentiment_mode"] = p.mode_label;
  j["confidence"] = json_number(p.confidence, decimals);
  j["dominance"] = json_number(p.dominance, decimals);
  j["dominance_label"] = p.dominance_label;
  j["entropy"] = json_number(p.entropy, decimals);
  j["entropy_normalized"] = json_number(p.entropy_normalized, decimals);
  nlohmann::ordered_json prof = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < p.profile.size() && i < labels.size(); ++i)
    prof[labels[i]] = json_number(p.profile[i], decimals);
  j["profile"] = std::move(prof);
  return j;
}

/// Per-aspect table: aspect, n, freq_pct, sentiment_mode, confidence,
/// dominance, dominance_label, entropy, entropy_normalized. Rows are sorted
/// by frequency, then aspect key.
inline std::string export_profiles(std::vector<AspectProfile> profiles, const LabelSpace& labels,
                                   const ReportStyle& style = {}) {
  sort_by_frequency(profiles);
  if (style.format == ReportFormat::csv) {
    detail::CsvWriter w(style.decimals);
    w.header({"aspect", "n", "freq_pct", "sentiment_mode", "confidence", "dominance", "dominance_label",
              "entropy", "entropy_normalized"});
    for (const auto& p : profiles) {
      w.text(p.aspect_key).count(p.n).num(100.0 * p.frequency_share).text(p.mode_label);
      w.num(p.confidence).num(p.dominance).text(p.dominance_label).num(p.entropy).num(p.entropy_normalized);
      w.end_row();
    }
    return w.str();
  }
  nlohmann::ordered_json j;
  j["labels"] = labels.labels();
  j["aspects"] = nlohmann::ordered_json::array();
  for (const auto& p : profiles) j["aspects"].push_back(profile_to_json(p, labels, style.decimals));
  return detail::dump(j);
}

// ---------------------------------------------------------------------------
// Source comparison
// ---------------------------------------------------------------------------

inline std::string export_divergence(const std::vector<DivergenceReport>& rows, const LabelSpace& labels,
                                     const ReportStyle& style = {}) {
  if (style.format == ReportFormat::csv) {
    detail::CsvWriter w(style.decimals);
    w.header({"aspect", "jsd", "dom_label_a", "dom_label_b", "D_a", "D_b", "H_a", "H_b", "polarity_flip", "n_a",
              "n_b", "delta_dominance", "delta_entropy"});
    for (const auto& r : rows) {
      w.text(r.aspect_key).num(r.jsd).text(r.side_a.dominance_label).text(r.side_b.dominance_label);
      w.num(r.side_a.dominance).num(r.side_b.dominance).num(r.side_a.entropy).num(r.side_b.entropy);
      w.flag(r.polarity_flip).count(r.side_a.n).count(r.side_b.n).num(r.delta_dominance).num(r.delta_entropy);
      w.end_row();
    }
    return w.str();
  }
  using detail::json_number;
  nlohmann::ordered_json j;
  j["labels"] = labels.labels();
  j["comparisons"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["aspect"] = r.aspect_key;
    row["jsd"] = json_number(r.jsd, style.decimals);
    row["polarity_flip"] = r.polarity_flip;
    row["delta_dominance"] = json_number(r.delta_dominance, style.decimals);
    row["delta_entropy"] = json_number(r.delta_entropy, style.decimals);
    row["a"] = profile_to_json(r.side_a, labels, style.decimals);
    row["b"] = profile_to_json(r.side_b, labels, style.decimals);
    j["comparisons"].push_back(std::move(row));
  }
  return detail::dump(j);
}

// ---------------------------------------------------------------------------
// Confidence sweep
// ---------------------------------------------------------------------------

/// CSV output is two tables separated by a blank line: the per-threshold
/// summary, then the ranking-stability pairs.
inline std::string export_sweep(const std::vector<SweepResult>& rows, const std::vector<RankingShift>& shifts,
                                const LabelSpace& labels, const ReportStyle& style = {}) {
  if (style.format == ReportFormat::csv) {
    detail::CsvWriter w(style.decimals);
    w.header({"threshold", "retained_records", "retained_aspects", "mean_entropy", "mean_dominance", "top_k"});
    for (const auto& r : rows) {
      std::string ranking;
      for (const auto& k : r.top_k_ranking) ranking += (ranking.empty() ? "" : ";") + k;
      w.num(r.threshold).count(r.retained_records).count(r.retained_aspects);
      w.num(r.mean_entropy).num(r.mean_dominance).text(ranking).end_row();
    }
    w.end_row();
    w.header({"threshold_from", "threshold_to", "jaccard"});
    for (const auto& s : shifts) w.num(s.threshold_from).num(s.threshold_to).num(s.jaccard).end_row();
    return w.str();
  }
  using detail::json_number;
  nlohmann::ordered_json j;
  j["labels"] = labels.labels();
  j["sweep"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["threshold"] = r.threshold;
    row["retained_records"] = r.retained_records;
    row["retained_aspects"] = r.retained_aspects;
    row["mean_entropy"] = json_number(r.mean_entropy, style.decimals);
    row["mean_dominance"] = json_number(r.mean_dominance, style.decimals);
    row["top_k"] = r.top_k_ranking;
    row["aspects"] = nlohmann::ordered_json::array();
    for (const auto& p : r.profiles) row["aspects"].push_back(profile_to_json(p, labels, style.decimals));
    j["sweep"].push_back(std::move(row));
  }
  j["ranking_stability"] = nlohmann::ordered_json::array();
  for (const auto& s : shifts) {
    j["ranking_stability"].push_back({{"threshold_from", s.threshold_from},
                                      {"threshold_to", s.threshold_to},
                                      {"jaccard", json_number(s.jaccard, style.decimals)}});
  }
  return detail::dump(j);
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

inline std::string export_bootstrap(const std::vector<BootstrapSummary>& rows, const ReportStyle& style = {}) {
  if (style.format == ReportFormat::csv) {
    detail::CsvWriter w(style.decimals);
    w.header({"aspect", "n", "entropy_mean", "entropy_ci_low", "entropy_ci_high", "dominance_mean",
              "dominance_ci_low", "dominance_ci_high", "entropy_point", "dominance_point", "replicates",
              "ci_level", "seed"});
    for (const auto& r : rows) {
      w.text(r.aspect_key).count(r.n).num(r.entropy_mean).num(r.entropy_ci.low).num(r.entropy_ci.high);
      w.num(r.dominance_mean).num(r.dominance_ci.low).num(r.dominance_ci.high);
      w.num(r.entropy_point).num(r.dominance_point).count(r.b);
      w.text(detail::format_number(r.ci_level, -1)).text(std::to_string(r.seed)).end_row();
    }
    return w.str();
  }
  using detail::json_number;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["aspect"] = r.aspect_key;
    row["n"] = r.n;
    row["entropy"] = {{"mean", json_number(r.entropy_mean, style.decimals)},
                      {"ci", {json_number(r.entropy_ci.low, style.decimals),
                              json_number(r.entropy_ci.high, style.decimals)}},
                      {"point", json_number(r.entropy_point, style.decimals)}};
    row["dominance"] = {{"mean", json_number(r.dominance_mean, style.decimals)},
                        {"ci", {json_number(r.dominance_ci.low, style.decimals),
                                json_number(r.dominance_ci.high, style.decimals)}},
                        {"point", json_number(r.dominance_point, style.decimals)}};
    row["replicates"] = r.b;
    row["ci_level"] = r.ci_level;
    row["seed"] = r.seed;
    j.push_back(std::move(row));
  }
  return detail::dump(nlohmann::ordered_json{{"bootstrap", std::move(j)}});
}

// ---------------------------------------------------------------------------
// Drift
// ---------------------------------------------------------------------------

/// CSV output is long-format: one row per (window, aspect).
inline std::string export_drift(const DriftSeries& series, const LabelSpace& labels, const ReportStyle& style = {}) {
  if (style.format == ReportFormat::csv) {
    detail::CsvWriter w(style.decimals);
    w.header({"window_start", "window_end", "window_records", "window_mean_entropy", "window_mean_dominance",
              "aspect", "n", "entropy", "dominance", "dominance_label", "jsd_vs_previous", "jsd_vs_baseline",
              "alert"});
    for (std::size_t i = 0; i < series.points.size(); ++i) {
      const auto& p = series.points[i];
      auto lookup = [](const std::map<std::string, double>& m, const std::string& k) -> std::optional<double> {
        const auto it = m.find(k);
        return it == m.end() ? std::nullopt : std::optional<double>(it->second);
      };
      auto begin_row = [&] {
        w.text(format_timestamp(p.window_start)).text(format_timestamp(p.window_end)).count(p.record_count);
        w.num(p.corpus_mean_entropy).num(p.corpus_mean_dominance);
      };
      if (p.profiles.empty()) {
        begin_row();
        w.text("").text("").text("").text("").text("").text("").text("").text("").end_row();
        continue;
      }
      for (const auto& a : p.profiles) {
        bool alert = false;
        for (const auto& al : series.alerts) alert |= al.window_index == i && al.aspect_key == a.aspect_key;
        begin_row();
        w.text(a.aspect_key).count(a.n).num(a.entropy).num(a.dominance).text(a.dominance_label);
        w.num(lookup(p.jsd_vs_previous, a.aspect_key)).num(lookup(p.jsd_vs_baseline, a.aspect_key));
        w.flag(alert).end_row();
      }
    }
    return w.str();
  }
  using detail::json_number;
  nlohmann::ordered_json j;
  j["labels"] = labels.labels();
  j["windows"] = nlohmann::ordered_json::array();
  for (const auto& p : series.points) {
    nlohmann::ordered_json row;
    row["start"] = format_timestamp(p.window_start);
    row["end"] = format_timestamp(p.window_end);
    row["records"] = p.record_count;
    row["mean_entropy"] = json_number(p.corpus_mean_entropy, style.decimals);
    row["mean_dominance"] = json_number(p.corpus_mean_dominance, style.decimals);
    row["aspects"] = nlohmann::ordered_json::array();
    for (const auto& a : p.profiles) row["aspects"].push_back(profile_to_json(a, labels, style.decimals));
    row["jsd_vs_previous"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : p.jsd_vs_previous) row["jsd_vs_previous"][k] = json_number(v, style.decimals);
    row["jsd_vs_baseline"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : p.jsd_vs_baseline) row["jsd_vs_baseline"][k] = json_number(v, style.decimals);
    j["windows"].push_back(std::move(row));
  }
  j["alerts"] = nlohmann::ordered_json::array();
  for (const auto& a : series.alerts) {
    j["alerts"].push_back({{"window_index", a.window_index},
                           {"window_start", format_timestamp(a.window_start)},
                           {"window_end", format_timestamp(a.window_end)},
                           {"aspect", a.aspect_key},
                           {"against", to_string(a.against)},
                           {"jsd", json_number(a.jsd, style.decimals)}});
  }
  return detail::dump(j);
}

// ---------------------------------------------------------------------------
// Ingest report
// ---------------------------------------------------------------------------

inline std::string export_ingest_report(const IngestReport& r, std::optional<ReportFormat> format = std::nullopt) {
  if (format == ReportFormat::json) {
    nlohmann::ordered_json j;
    j["accepted"] = r.accepted;
    j["rejected"] = r.rejected;
    j["renormalized"] = r.renormalized;
    j["rejection_reasons"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.rejection_reasons) j["rejection_reasons"][k] = v;
    return detail::dump(j);
  }
  if (format == ReportFormat::csv) {
    detail::CsvWriter w(0);
    w.header({"metric", "count"});
    w.text("accepted").count(r.accepted).end_row();
    w.text("rejected").count(r.rejected).end_row();
    w.text("renormalized").count(r.renormalized).end_row();
    for (const auto& [k, v] : r.rejection_reasons) w.text("reason:" + k).count(v).end_row();
    return w.str();
  }
  std::ostringstream os;
  os << "accepted: " << r.accepted << '\n' << "rejected: " << r.rejected << '\n'
     << "renormalized: " << r.renormalized << '\n';
  for (const auto& [k, v] : r.rejection_reasons) os << "reason " << k << ": " << v << '\n';
  return os.str();
}

}  // namespace sentiscope
