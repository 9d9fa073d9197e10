#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "sentiscope/ingestion.hpp"
#include "sentiscope/metrics.hpp"
#include "sentiscope/synthgen.hpp"

using namespace sentiscope;
using Catch::Matchers::WithinAbs;

namespace {

Corpus one(const AspectSpec& spec, std::uint64_t seed) { return generate(std::span(&spec, 1), LabelSpace{}, seed); }

}  // namespace

TEST_CASE("large concentration reproduces the true profile per instance", "[synthgen]") {
  const auto c = one({.aspect_key = "battery", .true_profile = {0.6, 0.3, 0.1}, .concentration = 1e6, .n = 50}, 3);
  REQUIRE(c.size() == 50);
  for (const auto& r : c.records()) {
    CHECK_THAT(r.dist[0], WithinAbs(0.6, 1e-2));
    CHECK_THAT(r.dist[1], WithinAbs(0.3, 1e-2));
    CHECK_THAT(r.dist[2], WithinAbs(0.1, 1e-2));
  }
}

TEST_CASE("aggregate profile converges to the true profile", "[synthgen]") {
  for (double kappa : {2.0, 20.0, kHardLabel}) {
    const auto c = one({.aspect_key = "battery", .true_profile = {0.6, 0.3, 0.1}, .concentration = kappa, .n = 10000}, 11);
    const auto p = profile_corpus(c).at(0);
    CHECK_THAT(p.profile[0], WithinAbs(0.6, 0.02));
    CHECK_THAT(p.profile[1], WithinAbs(0.3, 0.02));
    CHECK_THAT(p.profile[2], WithinAbs(0.1, 0.02));
    CHECK_THAT(p.entropy, WithinAbs(0.8979457248567797, 0.02));
  }
}

TEST_CASE("hard-label draws are one-hot", "[synthgen]") {
  const auto c = one({.aspect_key = "x", .true_profile = {0.5, 0.25, 0.25}, .n = 200}, 1);
  for (const auto& r : c.records()) {
    CHECK(r.dist.max() == 1.0);
    CHECK(r.instance_confidence == 1.0);
  }
}

TEST_CASE("tiny concentration still yields valid distributions", "[synthgen]") {
  const auto c = one({.aspect_key = "x", .true_profile = {0.5, 0.25, 0.25}, .concentration = 1e-6, .n = 200}, 1);
  for (const auto& r : c.records()) {
    double sum = 0.0;
    for (double p : r.dist.probs()) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("generation is deterministic in the seed", "[synthgen]") {
  const std::vector<AspectSpec> specs{
      {.aspect_key = "battery", .true_profile = {0.4, 0.4, 0.2}, .concentration = 5, .n = 100},
      {.aspect_key = "price", .true_profile = {0.1, 0.8, 0.1}, .concentration = 1, .n = 40,
       .time_range = std::make_pair(*parse_timestamp("2024-01-01"), *parse_timestamp("2024-01-08"))}};
  const auto a = write_records(generate(specs, LabelSpace{}, 99));
  CHECK(a == write_records(generate(specs, LabelSpace{}, 99)));
  CHECK(a != write_records(generate(specs, LabelSpace{}, 100)));

  // An aspect's records do not depend on which other aspects are generated.
  const auto alone = generate(std::span(specs).subspan(1), LabelSpace{}, 99);
  const auto both = generate(specs, LabelSpace{}, 99);
  const auto tail = both.records().subspan(100);
  REQUIRE(tail.size() == alone.size());
  for (std::size_t i = 0; i < tail.size(); ++i) {
    CHECK(tail[i].dist == alone.records()[i].dist);
    CHECK(tail[i].timestamp == alone.records()[i].timestamp);
  }
}

TEST_CASE("timestamps fall inside the range", "[synthgen]") {
  const auto lo = *parse_timestamp("2024-03-01T00:00:00Z");
  const auto hi = *parse_timestamp("2024-03-02T00:00:00Z");
  const auto c = one({.aspect_key = "x", .true_profile = {1, 0, 0}, .n = 500, .time_range = std::make_pair(lo, hi)}, 4);
  for (const auto& r : c.records()) {
    REQUIRE(r.timestamp);
    CHECK(*r.timestamp >= lo);
    CHECK(*r.timestamp < hi);
  }
}

TEST_CASE("spec validation", "[synthgen]") {
  CHECK_THROWS_AS(one({.aspect_key = "x", .true_profile = {0.5, 0.5}}, 0), DimensionMismatch);
  CHECK_THROWS_AS(one({.aspect_key = "x", .true_profile = {0.5, 0.6, 0.1}}, 0), InvalidDistribution);
  CHECK_THROWS_AS(one({.aspect_key = "x", .true_profile = {0.5, 0.5, 0}, .concentration = 0.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(one({.aspect_key = "x", .true_profile = {0.5, 0.5, 0}, .n = 0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(one({.aspect_key = "  ", .true_profile = {0.5, 0.5, 0}}, 0), std::invalid_argument);
}

TEST_CASE("parse_synth_config", "[synthgen]") {
  const auto doc = nlohmann::json::parse(R"({
    "labels": ["negative", "positive"],
    "seed": 7,
    "aspects": [
      {"aspect": "battery", "profile": {"positive": 0.7, "negative": 0.3}, "concentration": "inf", "n": 3},
      {"aspect": "price", "profile": [0.5, 0.5], "concentration": 4, "n": 2, "source": "reviews",
       "time_range": ["2024-01-01", "2024-01-02"]}
    ]})");
  const auto cfg = parse_synth_config(doc);
  CHECK(cfg.labels == LabelSpace({"negative", "positive"}));
  CHECK(cfg.seed == 7u);
  REQUIRE(cfg.aspects.size() == 2);
  CHECK(cfg.aspects[0].true_profile == std::vector<double>{0.3, 0.7});
  CHECK(std::isinf(cfg.aspects[0].concentration));
  CHECK(cfg.aspects[1].concentration == 4.0);
  CHECK(cfg.aspects[1].source == "reviews");
  CHECK(cfg.aspects[1].time_range.has_value());

  CHECK_THROWS(parse_synth_config(nlohmann::json::parse(R"({"aspects": [{"aspect": "x", "profile": {"bogus": 1}, "n": 1}]})")));
  CHECK_THROWS(parse_synth_config(nlohmann::json::parse(R"({"aspects": 3})")));
}
