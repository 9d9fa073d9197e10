#pragma once

// Kullback-Leibler and Jensen-Shannon divergences between sentiment
// profiles, and per-aspect comparison of two corpora.
//
// Divergences use base-2 logarithms so that JSD lies in [0, 1]. Entropy in
// metrics.hpp stays in nats.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sentiscope/core.hpp"
#include "sentiscope/metrics.hpp"

namespace sentiscope {

/// KL(p || q) in bits. Zero-probability terms of p contribute nothing.
inline double kl(const SentimentDistribution& p, const SentimentDistribution& q) {
  if (p.size() != q.size()) throw DimensionMismatch("KL of distributions with different sizes");
  double d = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p[s] <= 0.0) continue;
    if (q[s] <= 0.0) throw InfiniteDivergence{};
    d += p[s] * std::log2(p[s] / q[s]);
  }
  return std::max(d, 0.0);
}

/// Jensen-Shannon divergence in bits. Exactly symmetric; jsd(p, p) == 0.
inline double jsd(const SentimentDistribution& p, const SentimentDistribution& q) {
  if (p.size() != q.size()) throw DimensionMismatch("JSD of distributions with different sizes");
  // Both KL terms are accumulated in one pass against the midpoint mixture;
  // summing (p+q) keeps the result bit-identical under argument swap.
  double left = 0.0;
  double right = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const double m = 0.5 * (p[s] + q[s]);
    if (p[s] > 0.0) left += p[s] * std::log2(p[s] / m);
    if (q[s] > 0.0) right += q[s] * std::log2(q[s] / m);
  }
  return std::clamp(0.5 * left + 0.5 * right, 0.0, 1.0);
}

struct DivergenceReport {
  std::string aspect_key;
  double jsd = 0.0;
  AspectProfile side_a;
  AspectProfile side_b;
  bool polarity_flip = false;     // dominant class differs
  double delta_dominance = 0.0;   // side_b - side_a
  double delta_entropy = 0.0;     // side_b - side_a
};

struct CompareOptions {
  std::size_t top_k = 0;  // 0 keeps every shared aspect
  std::size_t min_count = 1;
};

/// Compares the aspects present in both corpora (at least min_count records
/// on each side). Rows are ordered by combined frequency, then aspect key.
inline std::vector<DivergenceReport> compare_sources(const Corpus& a, const Corpus& b,
                                                     const CompareOptions& opts = {}) {
  if (!(a.label_space() == b.label_space()))
    throw DimensionMismatch("compared corpora must share a label space");
  const auto groups_a = group_by_aspect(a);
  const auto groups_b = group_by_aspect(b);

  std::vector<DivergenceReport> out;
  for (const auto& [key, recs_a] : groups_a) {
    const auto it = groups_b.find(key);
    if (it == groups_b.end()) continue;
    const auto& recs_b = it->second;
    if (recs_a.size() < opts.min_count || recs_b.size() < opts.min_count) continue;

    DivergenceReport r{.aspect_key = key,
                       .side_a = profile_aspect(key, recs_a, a.size(), a.label_space()),
                       .side_b = profile_aspect(key, recs_b, b.size(), b.label_space())};
    r.jsd = jsd(r.side_a.profile, r.side_b.profile);
    r.polarity_flip = r.side_a.dominance_label != r.side_b.dominance_label;
    r.delta_dominance = r.side_b.dominance - r.side_a.dominance;
    r.delta_entropy = r.side_b.entropy - r.side_a.entropy;
    out.push_back(std::move(r));
  }

  std::ranges::sort(out, [](const DivergenceReport& x, const DivergenceReport& y) {
    const std::size_t nx = x.side_a.n + x.side_b.n;
    const std::size_t ny = y.side_a.n + y.side_b.n;
    if (nx != ny) return nx > ny;
    return x.aspect_key < y.aspect_key;
  });
  if (opts.top_k > 0 && out.size() > opts.top_k) out.resize(opts.top_k);
  return out;
}

}  // namespace sentiscope
