#pragma once

// Per-aspect indicators computed from soft model outputs: the averaged
// sentiment profile, polarity entropy, dominance, confidence and mode.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "sentiscope/core.hpp"

namespace sentiscope {

/// A class-level score together with the class it belongs to.
struct ClassScore {
  double value;
  std::size_t label_index;
};

/// Everything reported about one aspect.
struct AspectProfile {
  std::string aspect_key;
  std::size_t n = 0;
  SentimentDistribution profile = SentimentDistribution::uniform(3);
  double entropy = 0.0;             // nats
  double entropy_normalized = 0.0;  // entropy / ln K
  double dominance = 0.0;
  std::string dominance_label;
  double confidence = 0.0;
  std::string mode_label;
  double frequency_share = 0.0;
};

namespace detail {

template <class R, class Proj>
concept DistributionRange =
    std::ranges::forward_range<R> &&
    std::convertible_to<std::invoke_result_t<Proj&, std::ranges::range_reference_t<R>>,
                        const SentimentDistribution&>;

}  // namespace detail

/// Mean of the instance distributions, component by component.
template <std::ranges::forward_range R, class Proj = std::identity>
  requires detail::DistributionRange<R, Proj>
SentimentDistribution aggregate_profile(R&& instances, Proj proj = {}) {
  auto it = std::ranges::begin(instances);
  const auto end = std::ranges::end(instances);
  if (it == end) throw EmptyAspect{};
  const std::size_t k = std::invoke(proj, *it).size();
  std::vector<double> sum(k, 0.0);
  std::size_t n = 0;
  for (; it != end; ++it) {
    const SentimentDistribution& p = std::invoke(proj, *it);
    if (p.size() != k) throw DimensionMismatch("instances have differing class counts");
    for (std::size_t s = 0; s < k; ++s) sum[s] += p[s];
    ++n;
  }
  for (double& v : sum) v /= static_cast<double>(n);
  return SentimentDistribution(std::move(sum));
}

namespace detail {

inline double entropy_nats(std::span<const double> w) {
  double h = 0.0;
  for (double x : w)
    if (x > 0.0) h -= x * std::log(x);
  return std::clamp(h, 0.0, std::log(static_cast<double>(w.size())));
}

inline std::size_t argmax(std::span<const double> w) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] > w[best]) best = i;
  return best;
}

}  // namespace detail

/// Shannon entropy in nats, with 0 ln 0 = 0. Clamped to [0, ln K].
inline double entropy(const SentimentDistribution& dist) { return detail::entropy_nats(dist.probs()); }

inline double normalized_entropy(const SentimentDistribution& dist) {
  return std::clamp(entropy(dist) / std::log(static_cast<double>(dist.size())), 0.0, 1.0);
}

/// Largest component of the profile; the first class in label order wins ties.
inline ClassScore dominance(const SentimentDistribution& dist) {
  const std::size_t i = dist.argmax();
  return {dist[i], i};
}

/// Mean over instances of the per-instance maximum probability.
template <std::ranges::forward_range R, class Proj = std::identity>
  requires detail::DistributionRange<R, Proj>
double confidence(R&& instances, Proj proj = {}) {
  double sum = 0.0;
  std::size_t n = 0;
  for (auto&& x : instances) {
    sum += std::invoke(proj, x).max();
    ++n;
  }
  if (n == 0) throw EmptyAspect{};
  return sum / static_cast<double>(n);
}

/// Most frequent per-instance argmax class; ties go to the earlier label.
template <std::ranges::forward_range R, class Proj = std::identity>
  requires detail::DistributionRange<R, Proj>
std::size_t sentiment_mode(R&& instances, Proj proj = {}) {
  std::vector<std::size_t> votes;
  for (auto&& x : instances) {
    const SentimentDistribution& p = std::invoke(proj, x);
    if (votes.empty()) votes.assign(p.size(), 0);
    ++votes.at(p.argmax());
  }
  if (votes.empty()) throw EmptyAspect{};
  return static_cast<std::size_t>(std::ranges::max_element(votes) - votes.begin());
}

/// Computes every indicator for one aspect from its records.
/// `corpus_total` is the record count that frequency_share is relative to.
inline AspectProfile profile_aspect(std::string aspect_key, std::span<const PredictionRecord> records,
                                    std::size_t corpus_total, const LabelSpace& labels) {
  if (records.empty()) throw EmptyAspect{};
  AspectProfile out{.aspect_key = std::move(aspect_key),
                    .n = records.size(),
                    .profile = aggregate_profile(records, &PredictionRecord::dist)};
  if (out.profile.size() != labels.size())
    throw DimensionMismatch("records do not match the label space");
  out.entropy = entropy(out.profile);
  out.entropy_normalized = normalized_entropy(out.profile);
  const ClassScore dom = dominance(out.profile);
  out.dominance = dom.value;
  out.dominance_label = labels[dom.label_index];
  out.confidence = confidence(records, &PredictionRecord::dist);
  out.mode_label = labels[sentiment_mode(records, &PredictionRecord::dist)];
  out.frequency_share = corpus_total == 0 ? 0.0
                                          : static_cast<double>(out.n) / static_cast<double>(corpus_total);
  return out;
}

/// Report order: most frequent first, aspect key ascending on ties.
inline void sort_by_frequency(std::vector<AspectProfile>& profiles) {
  std::ranges::sort(profiles, [](const AspectProfile& a, const AspectProfile& b) {
    if (a.n != b.n) return a.n > b.n;
    return a.aspect_key < b.aspect_key;
  });
}

struct ProfileOptions {
  std::size_t min_count = 1;
  std::size_t top_k = 0;  // 0 keeps every aspect
};

/// Profiles every aspect of a corpus, in report order.
inline std::vector<AspectProfile> profile_corpus(const Corpus& corpus, const ProfileOptions& opts = {}) {
  std::vector<AspectProfile> out;
  for (const auto& [key, recs] : group_by_aspect(corpus)) {
    if (recs.size() < opts.min_count) continue;
    out.push_back(profile_aspect(key, recs, corpus.size(), corpus.label_space()));
  }
  sort_by_frequency(out);
  if (opts.top_k > 0 && out.size() > opts.top_k) out.resize(opts.top_k);
  return out;
}

}  // namespace sentiscope
