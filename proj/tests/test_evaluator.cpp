// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "avtime/error.hpp"
#include "avtime/evaluator.hpp"
#include "avtime/promptgen.hpp"
#include "avtime/rng.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

namespace {

using avtime::GroundTruth;
using avtime::Prediction;

struct Instance {
  std::vector<Prediction> preds;
  std::vector<GroundTruth> gts;
};

// Integer endpoints keep every IoU an exact ratio, so threshold comparisons
// agree bit for bit between implementations.
Instance random_instance(avtime::Rng& rng, std::size_t classes, bool unique_queries) {
  Instance in;
  const char* videos[] = {"v0", "v1"};
  const auto n_gt = static_cast<std::size_t>(rng.uniform_int(1, 4));
  for (std::size_t i = 0; i < n_gt; ++i) {
    const auto s = static_cast<double>(rng.uniform_int(0, 15));
    const auto e = s + static_cast<double>(rng.uniform_int(1, 8));
    std::string label = "c" + std::to_string(rng.uniform_index(classes));
    std::string video = videos[rng.uniform_index(2)];
    if (unique_queries) {
      bool dup = false;
      for (const auto& g : in.gts) dup |= g.video_id == video && g.label == label;
      if (dup) continue;
    }
    in.gts.push_back({video, label, s, e});
  }
  const auto n_pred = static_cast<std::size_t>(rng.uniform_int(0, 6));
  for (std::size_t i = 0; i < n_pred; ++i) {
    const auto s = static_cast<double>(rng.uniform_int(0, 15));
    const auto e = s + static_cast<double>(rng.uniform_int(1, 8));
    // Few distinct scores so rank ties are common.
    in.preds.push_back({videos[rng.uniform_index(2)], "c" + std::to_string(rng.uniform_index(classes)),
                        s, e, static_cast<double>(rng.uniform_int(1, 4)) / 4.0});
  }
  return in;
}

TEST(Tiou, Examples) {
  EXPECT_NEAR(avtime::tiou({0, 10}, {5, 15}), 5.0 / 15.0, 1e-15);
  EXPECT_EQ(avtime::tiou({0, 10}, {0, 10}), 1.0);
  EXPECT_EQ(avtime::tiou({0, 1}, {2, 3}), 0.0);
}

TEST(Tiou, Symmetric) {
  avtime::Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform01() * 10, b = a + 0.01 + rng.uniform01();
    const double c = rng.uniform01() * 10, d = c + 0.01 + rng.uniform01();
    EXPECT_EQ(avtime::tiou({a, b}, {c, d}), avtime::tiou({c, d}, {a, b}));
  }
}

TEST(Tiou, DegenerateIntervalRejected) {
  EXPECT_THROW(avtime::tiou({1, 1}, {0, 2}), avtime::ValidationError);
}

TEST(ApAt, PerfectMatchEveryThreshold) {
  const std::vector<GroundTruth> g{{"v", "a", 0, 10}};
  const std::vector<Prediction> p{{"v", "a", 0, 10, 0.3}};
  for (double thr : avtime::default_average_thresholds()) EXPECT_EQ(avtime::ap_at(p, g, thr), 1.0);
}

TEST(ApAt, TrailingFalsePositiveDoesNotHurt) {
  const std::vector<GroundTruth> g{{"v", "a", 0, 10}};
  const std::vector<Prediction> p{{"v", "a", 0, 10, 0.9}, {"v", "a", 20, 30, 0.8}};
  EXPECT_EQ(avtime::ap_at(p, g, 0.5), 1.0);
  EXPECT_EQ(oracle::average_precision(p, g, 0.5), 1.0);
}

TEST(ApAt, BelowThresholdScoresZero) {
  const std::vector<GroundTruth> g{{"v", "a", 0, 10}};
  const std::vector<Prediction> p{{"v", "a", 5, 15, 1.0}};
  EXPECT_EQ(avtime::ap_at(p, g, 0.5), 0.0);
}

TEST(ApAt, EmptyGroundTruthIsZero) {
  const std::vector<Prediction> p{{"v", "a", 5, 15, 1.0}};
  EXPECT_EQ(avtime::ap_at(p, {}, 0.5), 0.0);
}

TEST(ApAt, MatchesBruteForceOracle) {
  avtime::Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    const auto in = random_instance(rng, 1, false);
    for (double thr : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      ASSERT_NEAR(avtime::ap_at(in.preds, in.gts, thr), oracle::average_precision(in.preds, in.gts, thr), 1e-9);
    }
  }
}

TEST(ApAt, RaisingMatchedScoreNeverLowersAp) {
  avtime::Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    auto in = random_instance(rng, 1, false);
    if (in.preds.empty()) continue;
    const double before = avtime::ap_at(in.preds, in.gts, 0.5);
    // Raise a prediction that overlaps some GT exactly enough to match.
    for (auto& p : in.preds) {
      bool matches = false;
      for (const auto& g : in.gts) {
        matches |= g.video_id == p.video_id && avtime::tiou({p.start_s, p.end_s}, {g.start_s, g.end_s}) >= 0.5;
      }
      if (matches) {
        p.score = 10.0;
        break;
      }
    }
    EXPECT_GE(avtime::ap_at(in.preds, in.gts, 0.5) + 1e-12, before);
  }
}

TEST(EvaluateAvedl, PerfectPredictor) {
  const std::vector<GroundTruth> g{{"v1", "dog", 0, 4}, {"v1", "rain", 3, 9}, {"v2", "dog", 1, 2}};
  std::vector<Prediction> p;
  for (const auto& x : g) p.push_back({x.video_id, x.label, x.start_s, x.end_s, 1.0});
  const auto r = avtime::evaluate_avedl(p, g);
  ASSERT_EQ(r.map_at.size(), 5u);
  for (const auto& s : r.map_at) EXPECT_EQ(s.value, 1.0);
  EXPECT_EQ(r.avg_map, 1.0);
  EXPECT_EQ(r.classes, 2u);
  EXPECT_EQ(r.videos, 2u);
}

TEST(EvaluateAvedl, NoPredictionsAllZero) {
  const std::vector<GroundTruth> g{{"v1", "dog", 0, 4}};
  const auto r = avtime::evaluate_avedl({}, g);
  for (const auto& s : r.map_at) EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(r.avg_map, 0.0);
}

TEST(EvaluateAvedl, EmptyGroundTruthRejected) {
  EXPECT_THROW(avtime::evaluate_avedl({}, {}), avtime::ValidationError);
}

TEST(EvaluateAvedl, UnknownPredictionClassWarned) {
  const std::vector<GroundTruth> g{{"v1", "dog", 0, 4}};
  const std::vector<Prediction> p{{"v1", "cat", 0, 4, 1.0}};
  const auto r = avtime::evaluate_avedl(p, g);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(EvaluateAvedl, MatchesBruteForceOracle) {
  avtime::Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const auto in = random_instance(rng, 3, false);
    const auto r = avtime::evaluate_avedl(in.preds, in.gts);
    for (const auto& s : r.map_at) {
      ASSERT_NEAR(s.value, oracle::mean_ap(in.preds, in.gts, s.threshold), 1e-9);
    }
    double avg = 0.0;
    for (int k = 1; k <= 9; ++k) avg += oracle::mean_ap(in.preds, in.gts, k / 10.0);
    ASSERT_NEAR(r.avg_map, avg / 9.0, 1e-9);
  }
}

TEST(EvaluateAvedl, HigherThresholdNeverHigherMap) {
  avtime::Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const auto in = random_instance(rng, 3, false);
    const auto r = avtime::evaluate_avedl(in.preds, in.gts);
    for (std::size_t k = 1; k < r.map_at.size(); ++k) {
      EXPECT_LE(r.map_at[k].value, r.map_at[k - 1].value + 1e-12);
    }
  }
}

TEST(EvaluateVtg, AllExact) {
  const std::vector<GroundTruth> g{{"v1", "q1", 0, 4}, {"v2", "q2", 3, 9}};
  const std::vector<Prediction> p{{"v1", "q1", 0, 4, 1.0}, {"v2", "q2", 3, 9, 1.0}};
  const auto r = avtime::evaluate_vtg(p, g);
  EXPECT_EQ(r.r1_at[0].value, 1.0);
  EXPECT_EQ(r.r1_at[1].value, 1.0);
  EXPECT_EQ(r.miou, 1.0);
}

TEST(EvaluateVtg, PointSixAndPointEight) {
  // IoU 6/10 and 8/10.
  const std::vector<GroundTruth> g{{"v1", "q1", 0, 10}, {"v2", "q2", 0, 10}};
  const std::vector<Prediction> p{{"v1", "q1", 0, 6, 1.0}, {"v2", "q2", 2, 10, 1.0}};
  const auto r = avtime::evaluate_vtg(p, g);
  EXPECT_EQ(r.r1_at[0].threshold, 0.5);
  EXPECT_EQ(r.r1_at[0].value, 1.0);
  EXPECT_EQ(r.r1_at[1].threshold, 0.7);
  EXPECT_EQ(r.r1_at[1].value, 0.5);
  EXPECT_NEAR(r.miou, 0.7, 1e-15);
}

TEST(EvaluateVtg, MissingPredictionCountsZero) {
  const std::vector<GroundTruth> g{{"v1", "q1", 0, 10}, {"v2", "q2", 0, 10}};
  const std::vector<Prediction> p{{"v1", "q1", 0, 10, 1.0}};
  const auto r = avtime::evaluate_vtg(p, g);
  EXPECT_EQ(r.miou, 0.5);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(EvaluateVtg, DuplicateQueryRejected) {
  const std::vector<GroundTruth> g{{"v1", "q1", 0, 10}, {"v1", "q1", 2, 3}};
  EXPECT_THROW(avtime::evaluate_vtg({}, g), avtime::ValidationError);
}

TEST(EvaluateVtg, MatchesBruteForceOracle) {
  avtime::Rng rng(321);
  for (int i = 0; i < 1000; ++i) {
    const auto in = random_instance(rng, 3, true);
    const auto r = avtime::evaluate_vtg(in.preds, in.gts);
    const auto o = oracle::grounding(in.preds, in.gts);
    ASSERT_NEAR(r.r1_at[0].value, o.r1_05, 1e-9);
    ASSERT_NEAR(r.r1_at[1].value, o.r1_07, 1e-9);
    ASSERT_NEAR(r.miou, o.miou, 1e-9);
  }
}

TEST(ParseResponse, NaturalLanguage) {
  const auto r = avtime::parse_response("from 17 to 35", 200.0, 100);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_DOUBLE_EQ(r.events[0].start_s, 34.0);
  EXPECT_DOUBLE_EQ(r.events[0].end_s, 72.0);
}

TEST(ParseResponse, JsonEvents) {
  const auto r = avtime::parse_response(R"({"events":[{"description":"dog barks","start":0,"end":9}]})", 100.0, 100);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].label, "dog barks");
  EXPECT_DOUBLE_EQ(r.events[0].start_s, 0.0);
  EXPECT_DOUBLE_EQ(r.events[0].end_s, 10.0);
}

TEST(ParseResponse, NothingToParse) {
  EXPECT_TRUE(avtime::parse_response("no event occurs", 10.0, 100).events.empty());
}

TEST(ParseResponse, SeveralMatchesAndClamping) {
  const auto r = avtime::parse_response("A from 0 to 9, then from 95 to 120. Also From 50 to 40.", 100.0, 100);
  ASSERT_EQ(r.events.size(), 2u);
  EXPECT_DOUBLE_EQ(r.events[1].start_s, 95.0);
  EXPECT_DOUBLE_EQ(r.events[1].end_s, 100.0);
  EXPECT_EQ(r.warnings.size(), 2u);
}

TEST(ParseResponse, RoundTripQuantizationOnly) {
  avtime::Rng rng(99);
  for (int i = 0; i < 10000; ++i) {
    const double total = 0.5 + rng.uniform01() * 1000.0;
    double a = rng.uniform01() * total, b = rng.uniform01() * total;
    if (a > b) std::swap(a, b);
    if (b - a < total / 100.0) continue;
    const auto tau = avtime::format_interval(a, b, total, 100);
    const auto parsed = avtime::parse_response(tau.text, total, 100);
    ASSERT_EQ(parsed.events.size(), 1u);
    // Quantization bound: each end moves by at most half a token.
    const double token = total / 100.0;
    const double len = b - a;
    const double floor_iou = std::max(0.0, (len - token) / (len + token));
    EXPECT_GE(avtime::tiou({a, b}, {parsed.events[0].start_s, parsed.events[0].end_s}) + 1e-12, floor_iou);
  }
}

TEST(AirSweep, SkipsMissingRows) {
  const std::vector<GroundTruth> g{{"v1", "dog", 0, 4}};
  const std::vector<int> airs{0, 25, 50};
  const auto rows = avtime::sweep_air(airs, [&](int air) -> std::optional<std::vector<Prediction>> {
    if (air == 25) return std::nullopt;
    return std::vector<Prediction>{{"v1", "dog", 0, air == 0 ? 4.0 : 1.0, 1.0}};
  }, g);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].air_percent, 0);
  EXPECT_EQ(rows[0].report.avg_map, 1.0);
  EXPECT_EQ(rows[1].air_percent, 50);
  EXPECT_FALSE(avtime::air_table(rows).empty());
}

TEST(AirSweep, DefaultGridHasQuarterRow) {
  const auto& grid = avtime::default_air_grid_percent();
  EXPECT_EQ(grid.front(), 0);
  EXPECT_EQ(grid.back(), 100);
  EXPECT_NE(std::find(grid.begin(), grid.end(), 25), grid.end());
}

TEST(PredictionIo, RoundTrip) {
  testing_support::TempDir dir;
  const std::vector<Prediction> p{{"v1", "dog", 0.25, 4.5, 0.75}};
  const std::vector<GroundTruth> g{{"v1", "dog", 0, 4}};
  avtime::write_predictions(p, dir.file("p.jsonl"));
  avtime::write_ground_truth(g, dir.file("g.jsonl"));
  const auto p2 = avtime::read_predictions(dir.file("p.jsonl"));
  const auto g2 = avtime::read_ground_truth(dir.file("g.jsonl"));
  ASSERT_EQ(p2.size(), 1u);
  EXPECT_EQ(p2[0].end_s, 4.5);
  EXPECT_EQ(p2[0].score, 0.75);
  ASSERT_EQ(g2.size(), 1u);
  EXPECT_EQ(g2[0].label, "dog");
}

TEST(Report, TableHasThresholdColumns) {
  const std::vector<GroundTruth> g{{"v1", "dog", 0, 4}};
  const auto table = avtime::avedl_table(avtime::evaluate_avedl({}, g));
  for (const char* col : {"0.5", "0.6", "0.7", "0.8", "0.9", "Avg."}) {
    EXPECT_NE(table.find(col), std::string::npos) << col;
  }
}

}  // namespace
