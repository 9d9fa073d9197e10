#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sentiscope/robustness.hpp"
#include "sentiscope/synthgen.hpp"

using namespace sentiscope;
using Catch::Matchers::WithinAbs;

namespace {

Corpus random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t aspects) {
  std::vector<PredictionRecord> recs;
  for (std::size_t i = 0; i < n; ++i)
    recs.push_back(make_record("r" + std::to_string(i), "", std::nullopt, "a" + std::to_string(rng() % aspects),
                               SentimentDistribution(fixtures::random_simplex(rng, 3, 0.1))));
  return Corpus(LabelSpace{}, std::move(recs));
}

// Each aspect leans to one class; its low-confidence instances are the flat ones.
Corpus graded_corpus() {
  std::vector<PredictionRecord> recs;
  const double peaks[] = {0.35, 0.5, 0.65, 0.8, 0.95};
  for (std::size_t a = 0; a < 6; ++a) {
    const std::size_t cls = a % 3;
    for (std::size_t rep = 0; rep < 3; ++rep) {
      for (double peak : peaks) {
        std::vector<double> p(3, (1.0 - peak) / 2.0);
        p[cls] = peak;
        recs.push_back(make_record("g" + std::to_string(recs.size()), "", std::nullopt, "aspect" + std::to_string(a),
                                   SentimentDistribution(p)));
      }
    }
  }
  return Corpus(LabelSpace{}, std::move(recs));
}

}  // namespace

TEST_CASE("filter_by_confidence", "[robustness]") {
  const auto battery = fixtures::corpus_of("battery", fixtures::battery());
  CHECK(filter_by_confidence(battery, 0.0).size() == 3);
  const auto kept = filter_by_confidence(battery, 0.8);
  REQUIRE(kept.size() == 2);
  CHECK(kept.records()[0].instance_confidence == 0.91);
  CHECK(kept.records()[1].instance_confidence == 0.87);
  CHECK(filter_by_confidence(battery, 1.0).empty());
  CHECK(filter_by_confidence(battery, 0.6).size() == 3);  // 0.60 == threshold is retained
  CHECK(filter_by_confidence(battery, 0.8).label_space() == battery.label_space());
  CHECK_THROWS_AS(filter_by_confidence(battery, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(filter_by_confidence(battery, -0.1), std::invalid_argument);
}

TEST_CASE("filtering uses supplied confidence verbatim", "[robustness]") {
  std::vector<PredictionRecord> recs{
      make_record("a", "", std::nullopt, "x", {0.9, 0.05, 0.05}, 0.3),
      make_record("b", "", std::nullopt, "x", {0.4, 0.3, 0.3}, 0.95),
  };
  const auto kept = filter_by_confidence(Corpus(LabelSpace{}, recs), 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept.records()[0].record_id == "b");
}

TEST_CASE("filter idempotence and monotone retention", "[robustness][property]") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = random_corpus(rng, 50 + rng() % 100, 1 + rng() % 12);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto once = filter_by_confidence(c, t);
    CHECK(filter_by_confidence(once, t).size() == once.size());

    const auto rows = confidence_sweep(c, kDefaultThresholds);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      REQUIRE(rows[i].retained_records <= rows[i - 1].retained_records);
      REQUIRE(rows[i].retained_aspects <= rows[i - 1].retained_aspects);
    }
  }
}

TEST_CASE("confidence_sweep on the battery example", "[robustness]") {
  const auto battery = fixtures::corpus_of("battery", fixtures::battery());
  const std::vector<double> grid{0.8};
  const auto rows = confidence_sweep(battery, grid);
  REQUIRE(rows.size() == 1);
  const auto& row = rows[0];
  CHECK(row.retained_records == 2);
  CHECK(row.retained_aspects == 1);
  REQUIRE(row.profiles.size() == 1);
  const auto& prof = row.profiles[0].profile;
  CHECK_THAT(prof[0], WithinAbs(0.495, 1e-12));
  CHECK_THAT(prof[1], WithinAbs(0.465, 1e-12));
  CHECK_THAT(prof[2], WithinAbs(0.04, 1e-12));
  // Oracle: -(0.495 ln 0.495 + 0.465 ln 0.465 + 0.04 ln 0.04).
  const double h = static_cast<double>(fixtures::ref_entropy_nats({0.495, 0.465, 0.04}));
  CHECK_THAT(h, WithinAbs(0.832896614748, 1e-12));
  CHECK_THAT(*row.mean_entropy, WithinAbs(h, 1e-12));
  CHECK_THAT(*row.mean_dominance, WithinAbs(0.495, 1e-12));
  CHECK(row.top_k_ranking == std::vector<std::string>{"battery"});
}

TEST_CASE("confidence_sweep shape and edge cases", "[robustness]") {
  const auto c = merge(fixtures::corpus_of("battery", fixtures::battery()),
                       fixtures::corpus_of("climate", fixtures::climate()));
  const auto rows = confidence_sweep(c, kDefaultThresholds);
  REQUIRE(rows.size() == 5);

  // theta = 0 matches the unfiltered profile.
  const auto profiles = profile_corpus(c);
  REQUIRE(rows[0].retained_records == c.size());
  REQUIRE(rows[0].profiles.size() == profiles.size());
  double mean_h = 0.0;
  for (const auto& p : profiles) mean_h += p.entropy;
  CHECK_THAT(*rows[0].mean_entropy, WithinAbs(mean_h / profiles.size(), 1e-15));

  const std::vector<double> high{0.99, 1.0};
  const auto empty_rows = confidence_sweep(c, high);
  CHECK(empty_rows[0].retained_records == 0);
  CHECK(empty_rows[0].retained_aspects == 0);
  CHECK_FALSE(empty_rows[0].mean_entropy.has_value());
  CHECK_FALSE(empty_rows[0].mean_dominance.has_value());
  CHECK(empty_rows[0].top_k_ranking.empty());

  const std::vector<double> unsorted{0.4, 0.2};
  CHECK_THROWS_AS(confidence_sweep(c, unsorted), std::invalid_argument);
  const std::vector<double> outside{0.2, 1.2};
  CHECK_THROWS_AS(confidence_sweep(c, outside), std::invalid_argument);
}

TEST_CASE("record-weighted sweep means", "[robustness]") {
  const auto c = merge(fixtures::corpus_of("battery", fixtures::battery()),
                       fixtures::corpus_of("climate", fixtures::climate()));
  const std::vector<double> grid{0.0};
  const auto row = confidence_sweep(c, grid, {.weighting = SweepWeighting::per_record})[0];
  const auto profiles = profile_corpus(c);
  double num = 0.0;
  for (const auto& p : profiles) num += static_cast<double>(p.n) * p.dominance;
  CHECK_THAT(*row.mean_dominance, WithinAbs(num / 5.0, 1e-15));
}

TEST_CASE("mean entropy falls when flat instances are the low-confidence ones", "[robustness]") {
  const auto rows = confidence_sweep(graded_corpus(), kDefaultThresholds);
  // 0.0 and 0.2 both keep everything (lowest peak is 0.35); each later step drops a tier.
  CHECK(rows[1].retained_records == rows[0].retained_records);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    CHECK(rows[i].retained_records < rows[i - 1].retained_records);
    CHECK(*rows[i].mean_entropy < *rows[i - 1].mean_entropy);
    CHECK(*rows[i].mean_dominance > *rows[i - 1].mean_dominance);
  }
}

TEST_CASE("ranking_stability", "[robustness]") {
  auto row = [](double t, std::vector<std::string> top) {
    SweepResult r;
    r.threshold = t;
    r.top_k_ranking = std::move(top);
    return r;
  };
  SECTION("identical rankings") {
    const std::vector<SweepResult> s{row(0.0, {"a", "b", "c"}), row(0.2, {"a", "b", "c"})};
    CHECK(ranking_stability(s, 3)[0].jaccard == 1.0);
  }
  SECTION("disjoint") {
    const std::vector<SweepResult> s{row(0.0, {"a", "b"}), row(0.2, {"c", "d"})};
    CHECK(ranking_stability(s, 2)[0].jaccard == 0.0);
  }
  SECTION("two of three shared") {
    const std::vector<SweepResult> s{row(0.0, {"a", "b", "c"}), row(0.2, {"a", "b", "d"})};
    const auto out = ranking_stability(s, 3);
    REQUIRE(out.size() == 1);
    CHECK(out[0].jaccard == 0.5);
    CHECK(out[0].threshold_from == 0.0);
    CHECK(out[0].threshold_to == 0.2);
  }
  SECTION("k beyond retained aspects uses the smaller set") {
    const std::vector<SweepResult> s{row(0.0, {"a", "b", "c"}), row(0.2, {"a"})};
    CHECK_THAT(ranking_stability(s, 10)[0].jaccard, WithinAbs(1.0 / 3.0, 1e-15));
    CHECK(ranking_stability(s, 1)[0].jaccard == 1.0);
  }
  SECTION("order inside the top-k does not matter") {
    const std::vector<SweepResult> s{row(0.0, {"a", "b"}), row(0.2, {"b", "a"}), row(0.4, {})};
    const auto out = ranking_stability(s, 2);
    REQUIRE(out.size() == 2);
    CHECK(out[0].jaccard == 1.0);
    CHECK(out[1].jaccard == 0.0);
  }
  SECTION("needs two rows") {
    const std::vector<SweepResult> s{row(0.0, {"a"})};
    CHECK_THROWS_AS(ranking_stability(s, 1), std::invalid_argument);
  }
}

TEST_CASE("nearest-rank percentiles", "[robustness][bootstrap]") {
  std::vector<double> v;
  for (int k = 1; k <= 1000; ++k) v.push_back(k / 1000.0);
  std::mt19937_64 rng(3);
  std::shuffle(v.begin(), v.end(), rng);
  const auto ci = percentile_interval(v, 0.95);
  CHECK(ci.low == 25 / 1000.0);
  CHECK(ci.high == 975 / 1000.0);

  // Against the exact-integer reference for several sizes and levels.
  struct Level {
    double level;
    std::uint64_t num, den;  // lower tail as an exact fraction
  };
  const Level levels[] = {{0.95, 25, 1000}, {0.9, 5, 100}, {0.99, 5, 1000}, {0.5, 1, 4}};
  for (std::size_t b : {1u, 2u, 7u, 40u, 100u, 999u, 1000u, 1001u, 4000u}) {
    std::vector<double> sample(b);
    for (auto& x : sample) x = std::uniform_real_distribution<double>(0, 1)(rng);
    for (const auto& l : levels) {
      const auto got = percentile_interval(sample, l.level);
      CHECK(got.low == fixtures::ref_nearest_rank(sample, l.num, l.den));
      CHECK(got.high == fixtures::ref_nearest_rank(sample, l.den - l.num, l.den));
    }
  }
  CHECK_THROWS_AS(nearest_rank(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST_CASE("bootstrap_ci basics", "[robustness][bootstrap]") {
  SECTION("single instance gives zero-width intervals") {
    const auto c = fixtures::corpus_of("x", {{0.6, 0.3, 0.1}});
    const auto s = bootstrap_ci("x", c.records(), {.replicates = 200, .seed = 1});
    CHECK(s.entropy_ci.width() == 0.0);
    CHECK(s.dominance_ci.width() == 0.0);
    CHECK(s.entropy_ci.low == s.entropy_point);
    CHECK(s.dominance_ci.low == 0.6);
    CHECK_THAT(s.entropy_mean, WithinAbs(s.entropy_point, 1e-12));
  }
  SECTION("single replicate") {
    const auto c = fixtures::corpus_of("battery", fixtures::battery());
    const auto s = bootstrap_ci("battery", c.records(), {.replicates = 1, .seed = 9});
    CHECK(s.entropy_ci.width() == 0.0);
    CHECK(s.dominance_ci.width() == 0.0);
    CHECK(s.entropy_ci.low == s.entropy_mean);
  }
  SECTION("argument validation") {
    const auto c = fixtures::corpus_of("battery", fixtures::battery());
    CHECK_THROWS_AS(bootstrap_ci("b", c.records(), {.replicates = 0}), std::invalid_argument);
    CHECK_THROWS_AS(bootstrap_ci("b", c.records(), {.ci_level = 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(bootstrap_ci("b", std::span<const PredictionRecord>{}, {}), EmptyAspect);
  }
}

TEST_CASE("bootstrap determinism", "[robustness][bootstrap]") {
  std::mt19937_64 rng(12);
  const auto c = random_corpus(rng, 300, 1);
  const auto recs = group_by_aspect(c).begin()->second;
  const auto one = bootstrap_replicates("a0", recs, {.replicates = 500, .seed = 77, .threads = 1});
  const auto many = bootstrap_replicates("a0", recs, {.replicates = 500, .seed = 77, .threads = 7});
  CHECK(one.entropy == many.entropy);
  CHECK(one.dominance == many.dominance);
  const auto again = bootstrap_replicates("a0", recs, {.replicates = 500, .seed = 77, .threads = 3});
  CHECK(one.entropy == again.entropy);
  const auto other = bootstrap_replicates("a0", recs, {.replicates = 500, .seed = 78, .threads = 1});
  CHECK(one.entropy != other.entropy);
  // A prefix of replicates is unaffected by B.
  const auto fewer = bootstrap_replicates("a0", recs, {.replicates = 100, .seed = 77, .threads = 2});
  CHECK(std::equal(fewer.entropy.begin(), fewer.entropy.end(), one.entropy.begin()));
}

TEST_CASE("bootstrap interval invariants", "[robustness][bootstrap][property]") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_corpus(rng, 5 + rng() % 80, 1);
    const auto recs = group_by_aspect(c).begin()->second;
    const auto s = bootstrap_ci("a0", recs, {.replicates = 400, .seed = static_cast<std::uint64_t>(trial)});
    CHECK(s.entropy_ci.low <= s.entropy_mean);
    CHECK(s.entropy_mean <= s.entropy_ci.high);
    CHECK(s.dominance_ci.low <= s.dominance_mean);
    CHECK(s.dominance_mean <= s.dominance_ci.high);
    CHECK(s.entropy_ci.low >= 0.0);
    CHECK(s.entropy_ci.high <= std::log(3.0));
    CHECK(s.dominance_ci.low >= 1.0 / 3.0 - 1e-15);
    CHECK(s.dominance_ci.high <= 1.0);
  }
}

TEST_CASE("bootstrap intervals narrow as N grows", "[robustness][bootstrap][property]") {
  auto median_width = [](std::size_t n) {
    std::vector<double> widths;
    for (std::uint64_t rep = 0; rep < 15; ++rep) {
      const std::vector<AspectSpec> specs{{.aspect_key = "a", .true_profile = {0.6, 0.3, 0.1},
                                           .concentration = 5.0, .n = n}};
      const auto c = generate(specs, LabelSpace{}, 100 + rep);
      const auto s = bootstrap_ci("a", c.records(), {.replicates = 300, .seed = rep});
      widths.push_back(s.entropy_ci.width());
    }
    std::ranges::sort(widths);
    return widths[widths.size() / 2];
  };
  CHECK(median_width(25) > median_width(400));
}

TEST_CASE("bootstrap_report", "[robustness][bootstrap]") {
  SECTION("one aspect, one row") {
    const auto c = fixtures::corpus_of("battery", fixtures::battery());
    const auto rows = bootstrap_report(c, {.threshold = 0.0, .top_k = 10, .bootstrap = {.replicates = 50}});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].aspect_key == "battery");
    CHECK(rows[0].n == 3);
    CHECK(rows[0].b == 50);
  }
  SECTION("filters first, then keeps the most frequent") {
    std::mt19937_64 rng(1);
    const auto c = random_corpus(rng, 400, 15);
    const auto rows = bootstrap_report(c, {.threshold = 0.6, .top_k = 4, .bootstrap = {.replicates = 50}});
    const auto expected = profile_corpus(filter_by_confidence(c, 0.6), {.top_k = 4});
    REQUIRE(rows.size() == expected.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].aspect_key == expected[i].aspect_key);
      CHECK(rows[i].n == expected[i].n);
    }
  }
  SECTION("defaults mirror threshold 0.8, top 10, B = 1000, 95%") {
    const BootstrapReportOptions d;
    CHECK(d.threshold == 0.8);
    CHECK(d.top_k == 10);
    CHECK(d.bootstrap.replicates == 1000);
    CHECK(d.bootstrap.ci_level == 0.95);
  }
}
