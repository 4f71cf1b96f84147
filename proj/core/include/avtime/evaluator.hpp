// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace avtime {

struct Interval {
  double start = 0.0;
  double end = 0.0;
};

/// Temporal IoU. Throws ValidationError when either interval has end <= start.
double tiou(const Interval& a, const Interval& b);

struct Prediction {
  std::string video_id;
  std::string label;
  double start_s = 0.0;
  double end_s = 0.0;
  double score = 1.0;
};

struct GroundTruth {
  std::string video_id;
  std::string label;
  double start_s = 0.0;
  double end_s = 0.0;
};

/// Thresholds {from, from + step, ..., to} computed as k / 10-style integer
/// multiples, e.g. threshold_range(1, 9, 10) = {0.1, ..., 0.9}.
std::vector<double> threshold_range(int first, int last, int denominator);

/// {0.5, 0.6, 0.7, 0.8, 0.9}
const std::vector<double>& default_detail_thresholds();
/// {0.1, 0.2, ..., 0.9}
const std::vector<double>& default_average_thresholds();

/// Average precision of one class at a tIoU threshold.
///
/// Predictions are ranked by descending score, then earlier start, then video
/// id. Each prediction greedily claims the unmatched ground truth of the same
/// video with the highest tIoU >= thr. AP = sum over true-positive ranks of
/// precision-at-rank / |GT|. Returns 0 when there is no ground truth.
double ap_at(std::span<const Prediction> preds, std::span<const GroundTruth> gts, double thr);

struct ThresholdScore {
  double threshold = 0.0;
  double value = 0.0;
};

struct EvalReport {
  /// mAP at each detail threshold.
  std::vector<ThresholdScore> map_at;
  /// Mean mAP over the averaging thresholds.
  double avg_map = 0.0;
  std::vector<ThresholdScore> r1_at;
  double miou = 0.0;
  std::size_t videos = 0;
  std::size_t classes = 0;
  std::size_t predictions = 0;
  std::vector<std::string> warnings;
};

/// Dense localization: per-threshold mAP is the unweighted mean AP over the
/// classes present in the ground truth. Prediction-only classes are ignored
/// with a warning. Throws ValidationError on an empty ground truth set or an
/// invalid interval.
EvalReport evaluate_avedl(std::span<const Prediction> preds, std::span<const GroundTruth> gts,
                          std::span<const double> detail_thresholds = default_detail_thresholds(),
                          std::span<const double> avg_thresholds = default_average_thresholds());

/// Temporal grounding. A query is (video_id, label) and must have exactly one
/// ground truth; its top-scoring prediction (ties: earlier start) is scored.
/// Queries without predictions count as IoU 0. Fills r1_at for
/// {0.5, 0.7} (or `recall_thresholds`) and miou.
EvalReport evaluate_vtg(std::span<const Prediction> preds, std::span<const GroundTruth> gts,
                        std::span<const double> recall_thresholds = {});

struct ParsedEvent {
  std::optional<std::string> label;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct ParseResult {
  std::vector<ParsedEvent> events;
  std::vector<std::string> warnings;
};

/// Extracts temporal intervals from a model response.
///
/// A response that is a JSON object {"events": [{"description", "start",
/// "end"}]} is read structurally; otherwise every "from <int> to <int>" is
/// extracted. Token indices map to seconds with an inclusive end token:
/// [s / T * total, (e + 1) / T * total]. Out-of-range indices are clamped to
/// [0, T-1] and pairs with start > end are dropped, both with a warning.
ParseResult parse_response(std::string_view text, double total_duration_s, std::size_t T);

/// Parsed response -> predictions for one video. JSON descriptions become the
/// label; otherwise `default_label` is used.
std::vector<Prediction> predictions_from_response(std::string_view video_id,
                                                  std::string_view response,
                                                  double total_duration_s, std::size_t T,
                                                  std::string_view default_label = {},
                                                  double score = 1.0);

/// AIR grid used for sweeps: 0, 10, 20, 25, 30, ..., 100 percent.
const std::vector<int>& default_air_grid_percent();

struct AirRow {
  int air_percent = 0;
  EvalReport report;
};

/// Evaluates dense localization once per AIR; `predict` supplies the
/// predictions produced at that rate (e.g. a model run on contexts built with
/// that rho). A nullopt return skips the row.
std::vector<AirRow> sweep_air(
    std::span<const int> air_percent,
    const std::function<std::optional<std::vector<Prediction>>(int air_percent)>& predict,
    std::span<const GroundTruth> gts);

std::vector<Prediction> read_predictions(const std::filesystem::path& path);
std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& path);
void write_predictions(std::span<const Prediction> preds, const std::filesystem::path& path);
void write_ground_truth(std::span<const GroundTruth> gts, const std::filesystem::path& path);

/// Report as JSON text (values in [0, 1]).
std::string report_to_json(const EvalReport& report);
/// Percent table with columns "0.5 0.6 0.7 0.8 0.9 Avg." for dense
/// localization, or "R1@0.5 R1@0.7 mIoU" for grounding.
std::string avedl_table(const EvalReport& report, std::string_view row_label = "avtime");
std::string vtg_table(const EvalReport& report, std::string_view row_label = "avtime");
std::string air_table(std::span<const AirRow> rows);
std::string air_to_json(std::span<const AirRow> rows);

}  // namespace avtime
