#pragma once

// Reading and writing the canonical line-delimited record format:
//
//   {"id": "r1", "source": "posts", "timestamp": "2024-05-01T12:00:00Z",
//    "aspect": "Battery", "probs": {"positive": 0.91, "negative": 0.06, "neutral": 0.03},
//    "confidence": 0.91}
//
// `probs` may also be an array aligned with the label space order.
// `source`, `timestamp` and `confidence` are optional.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sentiscope/core.hpp"
#include "sentiscope/time.hpp"

namespace sentiscope {

/// Reason codes attached to rejected lines. Each rejection carries exactly one.
namespace reason {
inline constexpr std::string_view invalid_json = "invalid_json";
inline constexpr std::string_view not_an_object = "not_an_object";
inline constexpr std::string_view missing_field = "missing_field";
inline constexpr std::string_view invalid_field_type = "invalid_field_type";
inline constexpr std::string_view empty_aspect = "empty_aspect";
inline constexpr std::string_view unknown_label = "unknown_label";
inline constexpr std::string_view missing_label = "missing_label";
inline constexpr std::string_view dimension_mismatch = "dimension_mismatch";
inline constexpr std::string_view probability_out_of_range = "probability_out_of_range";
inline constexpr std::string_view sum_out_of_tolerance = "sum_out_of_tolerance";
inline constexpr std::string_view invalid_timestamp = "invalid_timestamp";
inline constexpr std::string_view invalid_confidence = "invalid_confidence";
}  // namespace reason

struct IngestReport {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t renormalized = 0;
  std::map<std::string, std::size_t> rejection_reasons;
};

struct LoadOptions {
  double tolerance = 1e-6;
  bool strict = false;
  AspectNormalizer normalizer = normalize_aspect;
};

struct LoadResult {
  Corpus corpus;
  IngestReport report;
};

struct Rejection {
  std::string_view reason;
  std::string detail;
};

/// Outcome of parsing one non-blank line.
struct ParsedLine {
  std::variant<PredictionRecord, Rejection> value;
  bool renormalized = false;
};

/// Parses and validates one record line against the label space.
inline ParsedLine parse_record_line(std::string_view line, const LabelSpace& labels, const LoadOptions& opts) {
  using nlohmann::json;
  auto reject = [](std::string_view why, std::string detail = {}) {
    return ParsedLine{Rejection{why, std::move(detail)}};
  };

  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    return reject(reason::invalid_json, e.what());
  }
  if (!j.is_object()) return reject(reason::not_an_object);

  for (const char* field : {"id", "aspect", "probs"})
    if (!j.contains(field)) return reject(reason::missing_field, field);

  const json& id = j["id"];
  if (!id.is_string() && !id.is_number_integer()) return reject(reason::invalid_field_type, "id");
  std::string record_id = id.is_string() ? id.get<std::string>() : id.dump();

  std::string source;
  if (j.contains("source") && !j["source"].is_null()) {
    if (!j["source"].is_string()) return reject(reason::invalid_field_type, "source");
    source = j["source"].get<std::string>();
  }

  std::optional<Timestamp> ts;
  if (j.contains("timestamp") && !j["timestamp"].is_null()) {
    if (!j["timestamp"].is_string()) return reject(reason::invalid_timestamp, "not a string");
    ts = parse_timestamp(j["timestamp"].get<std::string>());
    if (!ts) return reject(reason::invalid_timestamp, j["timestamp"].get<std::string>());
  }

  if (!j["aspect"].is_string()) return reject(reason::invalid_field_type, "aspect");
  std::string aspect_raw = j["aspect"].get<std::string>();
  std::string aspect_key = opts.normalizer(aspect_raw);
  if (aspect_key.empty()) return reject(reason::empty_aspect);

  const json& pj = j["probs"];
  std::vector<double> probs(labels.size(), 0.0);
  if (pj.is_object()) {
    std::vector<bool> seen(labels.size(), false);
    for (const auto& [name, value] : pj.items()) {
      const auto idx = labels.index_of(name);
      if (!idx) return reject(reason::unknown_label, name);
      if (!value.is_number()) return reject(reason::invalid_field_type, "probs." + name);
      probs[*idx] = value.get<double>();
      seen[*idx] = true;
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (!seen[i]) return reject(reason::missing_label, labels[i]);
  } else if (pj.is_array()) {
    if (pj.size() != labels.size())
      return reject(reason::dimension_mismatch,
                    std::to_string(pj.size()) + " values for " + std::to_string(labels.size()) + " labels");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!pj[i].is_number()) return reject(reason::invalid_field_type, "probs[" + std::to_string(i) + "]");
      probs[i] = pj[i].get<double>();
    }
  } else {
    return reject(reason::invalid_field_type, "probs");
  }

  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) return reject(reason::probability_out_of_range);
    sum += p;
  }
  if (!(std::abs(sum - 1.0) <= opts.tolerance))
    return reject(reason::sum_out_of_tolerance, "sum " + std::to_string(sum));
  // Sums off by a few ulps are summation noise, not miscalibration; leaving
  // them alone keeps export -> load byte-stable.
  bool renormalized = false;
  if (std::abs(sum - 1.0) > 8.0 * std::numeric_limits<double>::epsilon()) {
    for (double& p : probs) p /= sum;
    renormalized = true;
  }

  std::optional<double> conf;
  if (j.contains("confidence") && !j["confidence"].is_null()) {
    if (!j["confidence"].is_number()) return reject(reason::invalid_confidence, "not a number");
    const double c = j["confidence"].get<double>();
    if (!(c >= 0.0 && c <= 1.0)) return reject(reason::invalid_confidence, std::to_string(c));
    conf = c;
  }

  SentimentDistribution dist(std::move(probs));
  const double instance_conf = conf ? *conf : dist.max();
  return ParsedLine{PredictionRecord{std::move(record_id), std::move(source), ts, std::move(aspect_raw),
                                     std::move(aspect_key), std::move(dist), instance_conf, conf.has_value()},
                    renormalized};
}

/// Reads records from a stream. Blank lines are skipped. In strict mode the
/// first invalid line throws SchemaError; otherwise it is counted and skipped.
inline LoadResult load(std::istream& in, const LabelSpace& labels, const LoadOptions& opts = {}) {
  IngestReport report;
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ParsedLine parsed = parse_record_line(line, labels, opts);
    if (auto* rej = std::get_if<Rejection>(&parsed.value)) {
      if (opts.strict) throw SchemaError(line_no, std::string(rej->reason), rej->detail);
      ++report.rejected;
      ++report.rejection_reasons[std::string(rej->reason)];
      continue;
    }
    ++report.accepted;
    if (parsed.renormalized) ++report.renormalized;
    records.push_back(std::move(std::get<PredictionRecord>(parsed.value)));
  }
  if (in.bad()) throw IoError("error while reading input");
  return {Corpus(labels, std::move(records)), report};
}

inline LoadResult load(const std::filesystem::path& path, const LabelSpace& labels, const LoadOptions& opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return load(in, labels, opts);
}

/// One canonical JSON object for a record; probabilities keyed by label name.
inline nlohmann::ordered_json record_to_json(const PredictionRecord& r, const LabelSpace& labels) {
  nlohmann::ordered_json j;
  j["id"] = r.record_id;
  j["source"] = r.source;
  if (r.timestamp) j["timestamp"] = format_timestamp(*r.timestamp);
  j["aspect"] = r.aspect_raw;
  nlohmann::ordered_json probs = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) probs[labels[i]] = r.dist[i];
  j["probs"] = std::move(probs);
  if (r.confidence_supplied) j["confidence"] = r.instance_confidence;
  return j;
}

/// Writes the corpus in the canonical format, one record per line.
inline void write_records(std::ostream& out, const Corpus& corpus) {
  for (const auto& r : corpus.records()) out << record_to_json(r, corpus.label_space()).dump() << '\n';
}

inline std::string write_records(const Corpus& corpus) {
  std::ostringstream os;
  write_records(os, corpus);
  return os.str();
}

}  // namespace sentiscope
