#pragma once

// Windowed time series of output statistics. Each window's per-aspect
// profiles are compared by JSD against the previous window and, optionally,
// a fixed baseline corpus; large shifts raise alerts.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentiscope/core.hpp"
#include "sentiscope/divergence.hpp"
#include "sentiscope/metrics.hpp"
#include "sentiscope/parallel.hpp"
#include "sentiscope/time.hpp"

namespace sentiscope {

/// Windows are half-open [start, start + width), with starts on multiples of
/// `step` counted from the Unix epoch.
struct WindowSpec {
  std::chrono::seconds width;
  std::chrono::seconds step;

  void validate() const {
    if (step.count() <= 0) throw std::invalid_argument("window step must be positive");
    if (width < step) throw std::invalid_argument("window width must be at least the step");
  }
};

struct Window {
  Timestamp start;
  Timestamp end;
  Corpus records;
};

namespace detail {

inline Timestamp floor_to(Timestamp t, std::chrono::milliseconds step) {
  const auto c = t.time_since_epoch().count();
  const auto s = step.count();
  auto q = c / s;
  if (c % s != 0 && c < 0) --q;
  return Timestamp{std::chrono::milliseconds{q * s}};
}

}  // namespace detail

/// Splits a timestamped corpus into windows. The covered span runs from the
/// step boundary at or before the earliest record to the step boundary after
/// the latest one; only windows lying entirely inside that span are emitted,
/// except that a span shorter than one window yields a single window.
inline std::vector<Window> windows(const Corpus& corpus, const WindowSpec& spec) {
  spec.validate();
  if (corpus.empty()) return {};
  for (const auto& r : corpus.records())
    if (!r.timestamp) throw MissingTimestamp(r.record_id);

  const auto [lo, hi] = std::ranges::minmax(corpus.records(), {}, [](const PredictionRecord& r) {
    return *r.timestamp;
  });
  const std::chrono::milliseconds step = spec.step;
  const std::chrono::milliseconds width = spec.width;
  const Timestamp span_start = detail::floor_to(*lo.timestamp, step);
  const Timestamp span_end = detail::floor_to(*hi.timestamp, step) + step;

  std::vector<Timestamp> starts;
  for (Timestamp s = span_start; s + width <= span_end; s += step) starts.push_back(s);
  if (starts.empty()) starts.push_back(span_start);

  std::vector<Window> out;
  out.reserve(starts.size());
  for (Timestamp s : starts) {
    const Timestamp e = s + width;
    out.push_back({s, e, corpus.filter([s, e](const PredictionRecord& r) {
                     return *r.timestamp >= s && *r.timestamp < e;
                   })});
  }
  return out;
}

enum class DriftReference { previous, baseline };

inline const char* to_string(DriftReference r) {
  return r == DriftReference::previous ? "previous" : "baseline";
}

struct DriftPoint {
  Timestamp window_start;
  Timestamp window_end;
  std::size_t record_count = 0;
  std::vector<AspectProfile> profiles;
  std::optional<double> corpus_mean_entropy;
  std::optional<double> corpus_mean_dominance;
  std::map<std::string, double> jsd_vs_previous;
  std::map<std::string, double> jsd_vs_baseline;
};

struct DriftAlert {
  std::size_t window_index;
  Timestamp window_start;
  Timestamp window_end;
  std::string aspect_key;
  DriftReference against;
  double jsd;
};

struct DriftSeries {
  std::vector<DriftPoint> points;
  std::vector<DriftAlert> alerts;
};

struct DriftOptions {
  double alert_jsd = 0.1;
  std::size_t min_count = 5;
  std::optional<Corpus> baseline;
  std::size_t threads = 1;
};

/// One DriftPoint per window. JSD maps cover every aspect present on both
/// sides of a comparison; an alert needs min_count records on both sides and
/// a JSD strictly above alert_jsd.
inline DriftSeries drift_series(const Corpus& corpus, const WindowSpec& spec, const DriftOptions& opts) {
  if (!(opts.alert_jsd >= 0.0 && opts.alert_jsd <= 1.0))
    throw std::invalid_argument("alert threshold must lie in [0, 1]");
  if (opts.baseline && !(opts.baseline->label_space() == corpus.label_space()))
    throw DimensionMismatch("baseline must share the corpus label space");

  const auto wins = windows(corpus, spec);
  std::vector<DriftPoint> points(wins.size());
  parallel_for(wins.size(), opts.threads, [&](std::size_t i) {
    DriftPoint& p = points[i];
    p.window_start = wins[i].start;
    p.window_end = wins[i].end;
    p.record_count = wins[i].records.size();
    p.profiles = profile_corpus(wins[i].records);
    if (!p.profiles.empty()) {
      double h = 0.0, d = 0.0;
      for (const auto& a : p.profiles) {
        h += a.entropy;
        d += a.dominance;
      }
      p.corpus_mean_entropy = h / static_cast<double>(p.profiles.size());
      p.corpus_mean_dominance = d / static_cast<double>(p.profiles.size());
    }
  });

  std::map<std::string, AspectProfile> baseline_profiles;
  if (opts.baseline)
    for (auto& a : profile_corpus(*opts.baseline)) baseline_profiles.emplace(a.aspect_key, std::move(a));

  DriftSeries out;
  auto compare = [&](std::size_t i, const AspectProfile& cur, const AspectProfile& ref,
                     DriftReference kind, std::map<std::string, double>& into) {
    const double d = jsd(cur.profile, ref.profile);
    into[cur.aspect_key] = d;
    if (cur.n >= opts.min_count && ref.n >= opts.min_count && d > opts.alert_jsd)
      out.alerts.push_back({i, points[i].window_start, points[i].window_end, cur.aspect_key, kind, d});
  };

  for (std::size_t i = 0; i < points.size(); ++i) {
    std::map<std::string, const AspectProfile*> prev;
    if (i > 0)
      for (const auto& a : points[i - 1].profiles) prev.emplace(a.aspect_key, &a);
    std::vector<AspectProfile> current = points[i].profiles;
    std::ranges::sort(current, {}, &AspectProfile::aspect_key);
    for (const auto& a : current) {
      if (auto it = prev.find(a.aspect_key); it != prev.end())
        compare(i, a, *it->second, DriftReference::previous, points[i].jsd_vs_previous);
      if (auto it = baseline_profiles.find(a.aspect_key); it != baseline_profiles.end())
        compare(i, a, it->second, DriftReference::baseline, points[i].jsd_vs_baseline);
    }
  }
  out.points = std::move(points);
  return out;
}

}  // namespace sentiscope
