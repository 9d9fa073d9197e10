#pragma once

// Stability procedures: confidence-threshold sweeps with ranking stability,
// and percentile bootstrap intervals for entropy and dominance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentiscope/core.hpp"
#include "sentiscope/metrics.hpp"
#include "sentiscope/parallel.hpp"
#include "sentiscope/random.hpp"

namespace sentiscope {

inline const std::vector<double> kDefaultThresholds{0.0, 0.2, 0.4, 0.6, 0.8};

// ---------------------------------------------------------------------------
// Confidence filtering
// ---------------------------------------------------------------------------

/// Keeps the records whose instance confidence is at least `threshold`.
inline Corpus filter_by_confidence(const Corpus& corpus, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("confidence threshold must lie in [0, 1]");
  return corpus.filter([threshold](const PredictionRecord& r) { return r.instance_confidence >= threshold; });
}

enum class SweepWeighting {
  per_aspect,  // every retained aspect counts once
  per_record,  // aspects weighted by their retained record count
};

struct SweepResult {
  double threshold = 0.0;
  std::size_t retained_records = 0;
  std::size_t retained_aspects = 0;
  std::optional<double> mean_entropy;    // empty when nothing is retained
  std::optional<double> mean_dominance;
  std::vector<std::string> top_k_ranking;
  std::vector<AspectProfile> profiles;   // report order
};

struct SweepOptions {
  std::size_t top_k = 10;
  SweepWeighting weighting = SweepWeighting::per_aspect;
};

inline SweepResult summarize_at(const Corpus& corpus, double threshold, const SweepOptions& opts) {
  const Corpus kept = filter_by_confidence(corpus, threshold);
  SweepResult row{.threshold = threshold, .retained_records = kept.size()};
  row.profiles = profile_corpus(kept);
  row.retained_aspects = row.profiles.size();
  if (!row.profiles.empty()) {
    double h = 0.0, d = 0.0, w = 0.0;
    for (const auto& p : row.profiles) {
      const double weight =
          opts.weighting == SweepWeighting::per_record ? static_cast<double>(p.n) : 1.0;
      h += weight * p.entropy;
      d += weight * p.dominance;
      w += weight;
    }
    row.mean_entropy = h / w;
    row.mean_dominance = d / w;
  }
  const std::size_t k = std::min(opts.top_k, row.profiles.size());
  for (std::size_t i = 0; i < k; ++i) row.top_k_ranking.push_back(row.profiles[i].aspect_key);
  return row;
}

/// Recomputes every aspect profile at each threshold. Thresholds must be
/// ascending and inside [0, 1].
inline std::vector<SweepResult> confidence_sweep(const Corpus& corpus,
                                                 std::span<const double> thresholds,
                                                 const SweepOptions& opts = {}) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0))
      throw std::invalid_argument("sweep thresholds must lie in [0, 1]");
    if (i > 0 && thresholds[i] < thresholds[i - 1])
      throw std::invalid_argument("sweep thresholds must be sorted ascending");
  }
  std::vector<SweepResult> rows;
  rows.reserve(thresholds.size());
  for (double t : thresholds) rows.push_back(summarize_at(corpus, t, opts));
  return rows;
}

struct RankingShift {
  double threshold_from;
  double threshold_to;
  double jaccard;
};

/// Jaccard overlap of the top-k aspect sets of consecutive sweep rows. When
/// a row retains fewer than k aspects its whole ranking is used. Two empty
/// sets count as identical.
inline std::vector<RankingShift> ranking_stability(std::span<const SweepResult> sweep, std::size_t k) {
  if (sweep.size() < 2) throw std::invalid_argument("ranking stability needs at least two sweep rows");
  auto top = [k](const SweepResult& r) {
    std::vector<std::string> s(r.top_k_ranking.begin(),
                               r.top_k_ranking.begin() +
                                   static_cast<std::ptrdiff_t>(std::min(k, r.top_k_ranking.size())));
    std::ranges::sort(s);
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  };
  std::vector<RankingShift> out;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    const auto a = top(sweep[i - 1]);
    const auto b = top(sweep[i]);
    std::vector<std::string> both;
    std::ranges::set_intersection(a, b, std::back_inserter(both));
    const std::size_t uni = a.size() + b.size() - both.size();
    const double j = uni == 0 ? 1.0 : static_cast<double>(both.size()) / static_cast<double>(uni);
    out.push_back({sweep[i - 1].threshold, sweep[i].threshold, j});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

struct Interval {
  double low = 0.0;
  double high = 0.0;

  double width() const noexcept { return high - low; }
  bool contains(double x) const noexcept { return low <= x && x <= high; }
};

/// Nearest-rank percentile of ascending-sorted values: the element at 1-based
/// rank ceil(q * n).
inline double nearest_rank(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
  // q * n is often a hair above an integer (0.025 * 1000 = 25.000000000000004);
  // the relative slack keeps exact ranks exact.
  const double r = q * static_cast<double>(sorted.size());
  auto rank = static_cast<std::ptrdiff_t>(std::ceil(r - 1e-10 * std::max(1.0, r)));
  rank = std::clamp<std::ptrdiff_t>(rank, 1, static_cast<std::ptrdiff_t>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

/// Two-sided percentile interval at `level` (e.g. 0.95 -> 2.5th / 97.5th).
inline Interval percentile_interval(std::vector<double> values, double level) {
  std::ranges::sort(values);
  const double tail = (1.0 - level) / 2.0;
  return {nearest_rank(values, tail), nearest_rank(values, 1.0 - tail)};
}

struct BootstrapOptions {
  std::size_t replicates = 1000;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // 0 = hardware concurrency
};

struct BootstrapSummary {
  std::string aspect_key;
  std::size_t n = 0;
  std::size_t b = 0;
  double entropy_point = 0.0;    // full-sample statistic
  double entropy_mean = 0.0;     // mean over replicates
  Interval entropy_ci;
  double dominance_point = 0.0;
  double dominance_mean = 0.0;
  Interval dominance_ci;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
};

/// Per-replicate statistics, indexed by replicate number.
struct BootstrapReplicates {
  std::vector<double> entropy;
  std::vector<double> dominance;
};

/// Draws B resamples of the aspect's records with replacement. Replicate b
/// depends only on (seed, aspect_key, b).
inline BootstrapReplicates bootstrap_replicates(std::string_view aspect_key,
                                                std::span<const PredictionRecord> records,
                                                const BootstrapOptions& opts) {
  if (records.empty()) throw EmptyAspect{};
  const std::size_t n = records.size();
  const std::size_t k = records.front().dist.size();
  BootstrapReplicates out{std::vector<double>(opts.replicates), std::vector<double>(opts.replicates)};

  parallel_for(opts.replicates, opts.threads, [&](std::size_t b) {
    SplitMix64 rng(opts.seed, aspect_key, b);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> sum(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto probs = records[pick(rng)].dist.probs();
      for (std::size_t s = 0; s < k; ++s) sum[s] += probs[s];
    }
    for (double& v : sum) v /= static_cast<double>(n);
    out.entropy[b] = detail::entropy_nats(sum);
    out.dominance[b] = sum[detail::argmax(sum)];
  });
  return out;
}

/// Percentile bootstrap intervals for one aspect's entropy and dominance.
inline BootstrapSummary bootstrap_ci(std::string aspect_key, std::span<const PredictionRecord> records,
                                     const BootstrapOptions& opts = {}) {
  if (records.empty()) throw EmptyAspect{};
  if (opts.replicates == 0) throw std::invalid_argument("bootstrap needs at least one replicate");
  if (!(opts.ci_level > 0.0 && opts.ci_level < 1.0))
    throw std::invalid_argument("confidence level must lie in (0, 1)");

  const auto reps = bootstrap_replicates(aspect_key, records, opts);
  const auto point = aggregate_profile(records, &PredictionRecord::dist);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  BootstrapSummary out;
  out.n = records.size();
  out.b = opts.replicates;
  out.entropy_point = entropy(point);
  out.entropy_mean = mean(reps.entropy);
  out.entropy_ci = percentile_interval(reps.entropy, opts.ci_level);
  out.dominance_point = dominance(point).value;
  out.dominance_mean = mean(reps.dominance);
  out.dominance_ci = percentile_interval(reps.dominance, opts.ci_level);
  out.ci_level = opts.ci_level;
  out.seed = opts.seed;
  out.aspect_key = std::move(aspect_key);
  return out;
}

struct BootstrapReportOptions {
  double threshold = 0.8;
  std::size_t top_k = 10;  // 0 = every aspect
  BootstrapOptions bootstrap;
};

/// Filters at the threshold, then bootstraps the top_k most frequent aspects.
inline std::vector<BootstrapSummary> bootstrap_report(const Corpus& corpus,
                                                      const BootstrapReportOptions& opts = {}) {
  const Corpus kept = filter_by_confidence(corpus, opts.threshold);
  const auto groups = group_by_aspect(kept);
  const auto profiles = profile_corpus(kept, {.min_count = 1, .top_k = opts.top_k});
  std::vector<BootstrapSummary> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(bootstrap_ci(p.aspect_key, groups.at(p.aspect_key), opts.bootstrap));
  return out;
}

}  // namespace sentiscope
