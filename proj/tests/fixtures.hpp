#pragma once

// Shared test data and independent reference computations. Nothing in here
// calls into the library's metric code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sentiscope/core.hpp"

namespace fixtures {

using sentiscope::Corpus;
using sentiscope::LabelSpace;
using sentiscope::PredictionRecord;
using sentiscope::SentimentDistribution;

// Three occurrences of "battery" (positive, negative, neutral order).
inline std::vector<SentimentDistribution> battery() {
  return {{0.91, 0.06, 0.03}, {0.08, 0.87, 0.05}, {0.21, 0.19, 0.60}};
}

// Two occurrences of "climate", reordered into positive, negative, neutral.
inline std::vector<SentimentDistribution> climate() { return {{0.90, 0.05, 0.05}, {0.10, 0.80, 0.10}}; }

inline Corpus corpus_of(const std::string& aspect, const std::vector<SentimentDistribution>& dists,
                        const std::string& source = "posts", const LabelSpace& labels = LabelSpace{}) {
  std::vector<PredictionRecord> recs;
  for (std::size_t i = 0; i < dists.size(); ++i)
    recs.push_back(sentiscope::make_record(aspect + "-" + std::to_string(i), source, std::nullopt, aspect, dists[i]));
  return Corpus(labels, std::move(recs));
}

// --- reference computations ------------------------------------------------

inline long double ref_entropy_nats(const std::vector<double>& w) {
  long double h = 0.0L;
  for (double x : w)
    if (x > 0.0) h -= static_cast<long double>(x) * std::log(static_cast<long double>(x));
  return h;
}

inline long double ref_entropy_bits(const std::vector<long double>& w) {
  long double h = 0.0L;
  for (long double x : w)
    if (x > 0.0L) h -= x * std::log2(x);
  return h;
}

// JSD through the entropy identity H(M) - (H(p) + H(q)) / 2, in bits.
inline long double ref_jsd(const std::vector<double>& p, const std::vector<double>& q) {
  std::vector<long double> lp(p.begin(), p.end()), lq(q.begin(), q.end()), m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = (lp[i] + lq[i]) / 2.0L;
  return ref_entropy_bits(m) - (ref_entropy_bits(lp) + ref_entropy_bits(lq)) / 2.0L;
}

inline std::vector<double> ref_mean(const std::vector<std::vector<double>>& xs) {
  std::vector<long double> acc(xs.front().size(), 0.0L);
  for (const auto& x : xs)
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] += x[i];
  std::vector<double> out;
  for (long double a : acc) out.push_back(static_cast<double>(a / xs.size()));
  return out;
}

// Nearest-rank percentile with the tail given as an exact fraction num/den:
// rank = ceil(num * n / den), 1-based.
inline double ref_nearest_rank(std::vector<double> v, std::uint64_t num, std::uint64_t den) {
  std::sort(v.begin(), v.end());
  const std::uint64_t rank = std::max<std::uint64_t>(1, (num * v.size() + den - 1) / den);
  return v[rank - 1];
}

// --- generators ------------------------------------------------------------

// Uniform point on the simplex, optionally with some components forced to 0.
inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double zero_prob = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution zero(zero_prob);
  std::vector<double> x(k);
  double sum = 0.0;
  for (auto& v : x) {
    v = zero(rng) ? 0.0 : e(rng);
    sum += v;
  }
  if (sum == 0.0) {
    x[0] = 1.0;
    return x;
  }
  for (auto& v : x) v /= sum;
  return x;
}

inline std::vector<SentimentDistribution> random_instances(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<SentimentDistribution> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(random_simplex(rng, k, 0.1));
  return out;
}

}  // namespace fixtures
