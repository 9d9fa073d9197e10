#pragma once

// Domain types shared by every module: the label space, points on the
// probability simplex, prediction records and immutable corpora.

#include <algorithm>
#include <clocale>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <locale.h>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>
#include <wctype.h>

#include "sentiscope/time.hpp"

namespace sentiscope {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyAspect : Error {
  EmptyAspect() : Error("aspect has no instances") {}
};

struct InfiniteDivergence : Error {
  InfiniteDivergence() : Error("KL divergence is infinite: p(s) > 0 where q(s) = 0") {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct InvalidDistribution : Error {
  using Error::Error;
};

struct MissingTimestamp : Error {
  explicit MissingTimestamp(const std::string& record_id)
      : Error("record '" + record_id + "' has no timestamp") {}
};

struct IoError : Error {
  using Error::Error;
};

struct SchemaError : Error {
  SchemaError(std::size_t line_number, std::string reason_code, const std::string& detail)
      : Error("line " + std::to_string(line_number) + ": " + reason_code +
              (detail.empty() ? "" : " (" + detail + ")")),
        line(line_number),
        reason(std::move(reason_code)) {}

  std::size_t line;
  std::string reason;
};

// ---------------------------------------------------------------------------
// LabelSpace
// ---------------------------------------------------------------------------

/// Ordered set of sentiment classes. The order is fixed at construction and
/// decides every argmax tie.
class LabelSpace {
 public:
  LabelSpace() : LabelSpace({"positive", "negative", "neutral"}) {}

  explicit LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) throw std::invalid_argument("label space needs at least two labels");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].empty()) throw std::invalid_argument("label names must be non-empty");
      for (std::size_t j = 0; j < i; ++j)
        if (labels_[i] == labels_[j])
          throw std::invalid_argument("duplicate label '" + labels_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& operator[](std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == name) return i;
    return std::nullopt;
  }

  /// ln K, the entropy of the uniform distribution over this space.
  double max_entropy() const { return std::log(static_cast<double>(labels_.size())); }

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// SentimentDistribution
// ---------------------------------------------------------------------------

/// A point on the K-class probability simplex.
class SentimentDistribution {
 public:
  static constexpr double kSumTolerance = 1e-6;

  explicit SentimentDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) throw InvalidDistribution("distribution needs at least two classes");
    double sum = 0.0;
    for (double p : probs_) {
      if (!std::isfinite(p) || p < 0.0 || p > 1.0)
        throw InvalidDistribution("probability outside [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
  }

  SentimentDistribution(std::initializer_list<double> probs)
      : SentimentDistribution(std::vector<double>(probs)) {}

  static SentimentDistribution uniform(std::size_t k) {
    return SentimentDistribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// Index of the largest component; the lowest index wins ties.
  std::size_t argmax() const noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs_.size(); ++i)
      if (probs_[i] > probs_[best]) best = i;
    return best;
  }

  double max() const noexcept { return probs_[argmax()]; }

  friend bool operator==(const SentimentDistribution&, const SentimentDistribution&) = default;
  friend auto operator<=>(const SentimentDistribution& a, const SentimentDistribution& b) {
    return a.probs_ <=> b.probs_;
  }

 private:
  std::vector<double> probs_;
};

// ---------------------------------------------------------------------------
// Aspect normalization
// ---------------------------------------------------------------------------

using AspectNormalizer = std::function<std::string(std::string_view)>;

namespace detail {

inline locale_t utf8_ctype() {
  static const locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(0));
    if (l == static_cast<locale_t>(0)) l = newlocale(LC_CTYPE_MASK, "C.utf8", static_cast<locale_t>(0));
    return l;
  }();
  return loc;
}

// Decodes one UTF-8 code point at s[i]; on malformed input returns the raw
// byte with len 1 and ok = false.
struct Utf8Char {
  char32_t cp;
  std::size_t len;
  bool ok;
};

inline Utf8Char decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1, true};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
  else return {b0, 1, false};
  if (i + len > s.size()) return {b0, 1, false};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {b0, 1, false};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len, true};
}

inline void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_space(char32_t cp) {
  if (cp < 0x80) return cp == ' ' || (cp >= '\t' && cp <= '\r');
  // glibc leaves the no-break spaces out of iswspace; they still separate words.
  if (cp == 0xA0 || cp == 0x2007 || cp == 0x202F) return true;
  const locale_t loc = utf8_ctype();
  return loc != static_cast<locale_t>(0) && iswspace_l(static_cast<wint_t>(cp), loc);
}

inline char32_t to_lower(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + ('a' - 'A') : cp;
  const locale_t loc = utf8_ctype();
  if (loc == static_cast<locale_t>(0)) return cp;
  return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
}

}  // namespace detail

/// Default aspect key: simple Unicode case folding, trimmed, with internal
/// whitespace runs collapsed to one ASCII space.
inline std::string normalize_aspect(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < raw.size();) {
    const auto ch = detail::decode_utf8(raw, i);
    i += ch.len;
    if (!ch.ok) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(ch.cp));
      continue;
    }
    if (detail::is_space(ch.cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    detail::encode_utf8(detail::to_lower(ch.cp), out);
  }
  return out;
}

/// Composes the default normalizer with an extra term-level hook (a stemmer
/// or lemmatizer). The hook sees already case-folded, trimmed text.
inline AspectNormalizer with_stemmer(std::function<std::string(std::string)> stem) {
  return [stem = std::move(stem)](std::string_view raw) { return stem(normalize_aspect(raw)); };
}

// ---------------------------------------------------------------------------
// PredictionRecord
// ---------------------------------------------------------------------------

/// One aspect occurrence as emitted by a sentiment model.
struct PredictionRecord {
  std::string record_id;
  std::string source;
  std::optional<Timestamp> timestamp;
  std::string aspect_raw;
  std::string aspect_key;
  SentimentDistribution dist;
  double instance_confidence;
  // True when instance_confidence came from the input rather than max(dist).
  bool confidence_supplied = false;
};

inline PredictionRecord make_record(std::string record_id, std::string source,
                                    std::optional<Timestamp> timestamp, std::string aspect_raw,
                                    SentimentDistribution dist,
                                    std::optional<double> confidence = std::nullopt,
                                    const AspectNormalizer& normalizer = normalize_aspect) {
  std::string key = normalizer(aspect_raw);
  if (key.empty()) throw std::invalid_argument("aspect normalizes to an empty key");
  if (confidence && !(*confidence >= 0.0 && *confidence <= 1.0))
    throw std::invalid_argument("confidence outside [0, 1]");
  const double conf = confidence ? *confidence : dist.max();
  return PredictionRecord{std::move(record_id), std::move(source), timestamp,
                          std::move(aspect_raw), std::move(key),      std::move(dist),
                          conf,                  confidence.has_value()};
}

namespace detail {

// Total order on record content used to make grouped output independent of
// input order.
inline bool content_less(const PredictionRecord& a, const PredictionRecord& b) {
  return std::tie(a.record_id, a.source, a.timestamp, a.aspect_raw, a.dist, a.instance_confidence) <
         std::tie(b.record_id, b.source, b.timestamp, b.aspect_raw, b.dist, b.instance_confidence);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

/// Immutable collection of records sharing one label space. Copies share the
/// underlying storage.
class Corpus {
 public:
  Corpus() : Corpus(LabelSpace{}) {}

  explicit Corpus(LabelSpace labels, std::vector<PredictionRecord> records = {})
      : labels_(std::move(labels)),
        records_(std::make_shared<const std::vector<PredictionRecord>>(std::move(records))) {
    for (const auto& r : *records_) {
      if (r.dist.size() != labels_.size())
        throw DimensionMismatch("record '" + r.record_id + "' has " + std::to_string(r.dist.size()) +
                                " classes, label space has " + std::to_string(labels_.size()));
      if (r.aspect_key.empty())
        throw std::invalid_argument("record '" + r.record_id + "' has an empty aspect key");
    }
  }

  const LabelSpace& label_space() const noexcept { return labels_; }
  std::span<const PredictionRecord> records() const noexcept { return *records_; }
  std::size_t size() const noexcept { return records_->size(); }
  bool empty() const noexcept { return records_->empty(); }

  template <class Pred>
  Corpus filter(Pred&& keep) const {
    std::vector<PredictionRecord> out;
    for (const auto& r : *records_)
      if (keep(r)) out.push_back(r);
    return Corpus(labels_, std::move(out));
  }

  Corpus with_source(std::string_view source) const {
    return filter([source](const PredictionRecord& r) { return r.source == source; });
  }

 private:
  LabelSpace labels_;
  std::shared_ptr<const std::vector<PredictionRecord>> records_;
};

inline Corpus merge(const Corpus& a, const Corpus& b) {
  if (!(a.label_space() == b.label_space()))
    throw DimensionMismatch("cannot merge corpora with different label spaces");
  std::vector<PredictionRecord> all(a.records().begin(), a.records().end());
  all.insert(all.end(), b.records().begin(), b.records().end());
  return Corpus(a.label_space(), std::move(all));
}

using AspectGroups = std::map<std::string, std::vector<PredictionRecord>>;

/// Partitions records by aspect key. Keys are ordered lexicographically and
/// records within a group are in canonical content order, so the result is
/// independent of the corpus's record order.
inline AspectGroups group_by_aspect(const Corpus& corpus) {
  AspectGroups groups;
  for (const auto& r : corpus.records()) groups[r.aspect_key].push_back(r);
  for (auto& [key, recs] : groups) std::stable_sort(recs.begin(), recs.end(), detail::content_less);
  return groups;
}

}  // namespace sentiscope
