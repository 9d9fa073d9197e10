#pragma once

// Synthetic corpora with known ground truth. Instance distributions are
// Dirichlet draws centred on a true profile; an infinite concentration
// yields one-hot (hard-label) instances drawn from the profile.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sentiscope/core.hpp"
#include "sentiscope/random.hpp"
#include "sentiscope/time.hpp"

namespace sentiscope {

inline constexpr double kHardLabel = std::numeric_limits<double>::infinity();

struct AspectSpec {
  std::string aspect_key;
  std::vector<double> true_profile;
  double concentration = kHardLabel;  // kappa; the Dirichlet parameter is kappa * true_profile
  std::size_t n = 1;
  std::string source = "synthetic";
  std::optional<std::pair<Timestamp, Timestamp>> time_range;  // [first, last)
};

namespace detail {

inline std::vector<double> dirichlet_draw(std::span<const double> mean, double kappa, SplitMix64& rng) {
  std::vector<double> x(mean.size(), 0.0);
  double sum = 0.0;
  for (std::size_t s = 0; s < mean.size(); ++s) {
    if (mean[s] <= 0.0) continue;
    std::gamma_distribution<double> g(kappa * mean[s], 1.0);
    x[s] = g(rng);
    sum += x[s];
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) return {};
  for (double& v : x) v /= sum;
  return x;
}

inline std::vector<double> one_hot_draw(std::span<const double> mean, SplitMix64& rng) {
  std::discrete_distribution<std::size_t> pick(mean.begin(), mean.end());
  std::vector<double> x(mean.size(), 0.0);
  x[pick(rng)] = 1.0;
  return x;
}

}  // namespace detail

inline void validate(const AspectSpec& spec, std::size_t k) {
  if (spec.true_profile.size() != k)
    throw DimensionMismatch("aspect '" + spec.aspect_key + "' profile does not match the label space");
  SentimentDistribution check(spec.true_profile);
  if (!(spec.concentration > 0.0)) throw std::invalid_argument("concentration must be positive");
  if (spec.n == 0) throw std::invalid_argument("aspect '" + spec.aspect_key + "' needs n >= 1");
  if (normalize_aspect(spec.aspect_key).empty()) throw std::invalid_argument("aspect key must be non-empty");
  if (spec.time_range && !(spec.time_range->first < spec.time_range->second))
    throw std::invalid_argument("time range must be non-empty");
}

/// Generates spec.n records per aspect. Instance i of an aspect is drawn
/// from a stream keyed by (seed, aspect_key, i).
inline Corpus generate(std::span<const AspectSpec> specs, const LabelSpace& labels, std::uint64_t seed) {
  std::vector<PredictionRecord> records;
  for (const auto& spec : specs) {
    validate(spec, labels.size());
    for (std::size_t i = 0; i < spec.n; ++i) {
      SplitMix64 rng(seed, spec.aspect_key, i);
      std::vector<double> probs;
      if (std::isfinite(spec.concentration)) probs = detail::dirichlet_draw(spec.true_profile, spec.concentration, rng);
      // Every gamma draw can underflow when kappa is tiny; the kappa -> 0 limit is a one-hot draw.
      if (probs.empty()) probs = detail::one_hot_draw(spec.true_profile, rng);

      std::optional<Timestamp> ts;
      if (spec.time_range) {
        const auto lo = spec.time_range->first.time_since_epoch().count();
        const auto hi = spec.time_range->second.time_since_epoch().count();
        std::uniform_int_distribution<std::int64_t> when(lo, hi - 1);
        ts = Timestamp{std::chrono::milliseconds{when(rng)}};
      }
      records.push_back(make_record(spec.aspect_key + "-" + std::to_string(i), spec.source, ts, spec.aspect_key,
                                    SentimentDistribution(std::move(probs))));
    }
  }
  return Corpus(labels, std::move(records));
}

/// Contents of a synth spec document:
///
///   {"labels": ["positive", "negative", "neutral"], "seed": 7,
///    "aspects": [{"aspect": "battery", "profile": {"positive": 0.6, ...} or [0.6, ...],
///                 "concentration": 20 | "inf" | null, "n": 100, "source": "posts",
///                 "time_range": ["2024-01-01T00:00:00Z", "2024-01-15T00:00:00Z"]}]}
struct SynthConfig {
  LabelSpace labels;
  std::vector<AspectSpec> aspects;
  std::optional<std::uint64_t> seed;
};

inline SynthConfig parse_synth_config(const nlohmann::json& doc) {
  auto fail = [](const std::string& what) -> void { throw std::invalid_argument("synth spec: " + what); };
  if (!doc.is_object()) fail("document must be an object");
  SynthConfig cfg;
  if (doc.contains("labels")) cfg.labels = LabelSpace(doc.at("labels").get<std::vector<std::string>>());
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (!doc.contains("aspects") || !doc.at("aspects").is_array()) fail("'aspects' must be an array");

  for (const auto& a : doc.at("aspects")) {
    AspectSpec spec;
    spec.aspect_key = a.at("aspect").get<std::string>();
    const auto& prof = a.at("profile");
    if (prof.is_array()) {
      spec.true_profile = prof.get<std::vector<double>>();
    } else if (prof.is_object()) {
      spec.true_profile.assign(cfg.labels.size(), 0.0);
      for (const auto& [name, v] : prof.items()) {
        const auto idx = cfg.labels.index_of(name);
        if (!idx) fail("unknown label '" + name + "' in profile of '" + spec.aspect_key + "'");
        spec.true_profile[*idx] = v.get<double>();
      }
    } else {
      fail("profile of '" + spec.aspect_key + "' must be an array or object");
    }
    if (a.contains("concentration")) {
      const auto& c = a.at("concentration");
      if (c.is_null() || (c.is_string() && (c == "inf" || c == "infinity")))
        spec.concentration = kHardLabel;
      else
        spec.concentration = c.get<double>();
    }
    spec.n = a.at("n").get<std::size_t>();
    if (a.contains("source")) spec.source = a.at("source").get<std::string>();
    if (a.contains("time_range")) {
      const auto& tr = a.at("time_range");
      if (!tr.is_array() || tr.size() != 2) fail("time_range must be [start, end]");
      const auto lo = parse_timestamp(tr[0].get<std::string>());
      const auto hi = parse_timestamp(tr[1].get<std::string>());
      if (!lo || !hi) fail("invalid timestamp in time_range of '" + spec.aspect_key + "'");
      spec.time_range = std::make_pair(*lo, *hi);
    }
    validate(spec, cfg.labels.size());
    cfg.aspects.push_back(std::move(spec));
  }
  return cfg;
}

}  // namespace sentiscope
