// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

// Reference implementations used only by tests. They are written from the
// metric definitions, not from the library code, and favour obviousness over
// speed.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "avtime/evaluator.hpp"
#include "avtime/synthesizer.hpp"

namespace oracle {

inline double overlap_ratio(double s1, double e1, double s2, double e2) {
  const double lo = s1 > s2 ? s1 : s2;
  const double hi = e1 < e2 ? e1 : e2;
  const double inter = hi > lo ? hi - lo : 0.0;
  const double uni = (e1 - s1) + (e2 - s2) - inter;
  return inter / uni;
}

// Insertion sort on (score desc, start asc, video asc, input position asc).
inline std::vector<std::size_t> rank_order(const std::vector<avtime::Prediction>& preds) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto before = [&](std::size_t a, std::size_t b) {
      const auto& pa = preds[a];
      const auto& pb = preds[b];
      if (pa.score != pb.score) return pa.score > pb.score;
      if (pa.start_s != pb.start_s) return pa.start_s < pb.start_s;
      if (pa.video_id != pb.video_id) return pa.video_id < pb.video_id;
      return a < b;
    };
    std::size_t pos = order.size();
    while (pos > 0 && before(i, order[pos - 1])) --pos;
    order.insert(order.begin() + static_cast<std::ptrdiff_t>(pos), i);
  }
  return order;
}

// True positives among the first `cutoff` ranked predictions, replaying the
// greedy matching from scratch.
inline std::size_t true_positives(const std::vector<avtime::Prediction>& preds,
                                  const std::vector<avtime::GroundTruth>& gts,
                                  const std::vector<std::size_t>& order, std::size_t cutoff,
                                  double thr) {
  std::vector<char> used(gts.size(), 0);
  std::size_t tp = 0;
  for (std::size_t r = 0; r < cutoff; ++r) {
    const auto& p = preds[order[r]];
    int pick = -1;
    double pick_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].video_id != p.video_id) continue;
      const double iou = overlap_ratio(p.start_s, p.end_s, gts[g].start_s, gts[g].end_s);
      if (iou < thr) continue;
      if (pick < 0 || iou > pick_iou) {
        pick = static_cast<int>(g);
        pick_iou = iou;
      }
    }
    if (pick >= 0) {
      used[static_cast<std::size_t>(pick)] = 1;
      ++tp;
    }
  }
  return tp;
}

// Area under the exact precision/recall step curve, one cutoff at a time.
inline double average_precision(const std::vector<avtime::Prediction>& preds,
                                const std::vector<avtime::GroundTruth>& gts, double thr) {
  if (gts.empty()) return 0.0;
  const auto order = rank_order(preds);
  double area = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 1; k <= preds.size(); ++k) {
    const auto tp = true_positives(preds, gts, order, k, thr);
    const double recall = static_cast<double>(tp) / static_cast<double>(gts.size());
    const double precision = static_cast<double>(tp) / static_cast<double>(k);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

inline double mean_ap(const std::vector<avtime::Prediction>& preds,
                      const std::vector<avtime::GroundTruth>& gts, double thr) {
  std::set<std::string> labels;
  for (const auto& g : gts) labels.insert(g.label);
  double sum = 0.0;
  for (const auto& label : labels) {
    std::vector<avtime::Prediction> p;
    std::vector<avtime::GroundTruth> g;
    for (const auto& x : preds) if (x.label == label) p.push_back(x);
    for (const auto& x : gts) if (x.label == label) g.push_back(x);
    sum += average_precision(p, g, thr);
  }
  return sum / static_cast<double>(labels.size());
}

struct VtgScores {
  double r1_05 = 0.0;
  double r1_07 = 0.0;
  double miou = 0.0;
};

inline VtgScores grounding(const std::vector<avtime::Prediction>& preds,
                           const std::vector<avtime::GroundTruth>& gts) {
  VtgScores s;
  for (const auto& g : gts) {
    const avtime::Prediction* best = nullptr;
    for (const auto& p : preds) {
      if (p.video_id != g.video_id || p.label != g.label) continue;
      if (!best || p.score > best->score ||
          (p.score == best->score && p.start_s < best->start_s)) {
        best = &p;
      }
    }
    const double iou = best ? overlap_ratio(best->start_s, best->end_s, g.start_s, g.end_s) : 0.0;
    s.r1_05 += iou >= 0.5 ? 1.0 : 0.0;
    s.r1_07 += iou >= 0.7 ? 1.0 : 0.0;
    s.miou += iou;
  }
  const double n = static_cast<double>(gts.size());
  s.r1_05 /= n;
  s.r1_07 /= n;
  s.miou /= n;
  return s;
}

// Offsets recomputed as running sums over the emitted segment order.
inline std::vector<std::pair<double, double>> cumulative_spans(
    const avtime::PseudoUntrimmedVideo& video) {
  std::vector<std::pair<double, double>> spans;
  double offset = 0.0;
  for (const auto& seg : video.segments) {
    spans.emplace_back(offset, offset + seg.caption_duration_s * seg.scale_factor);
    offset += seg.original_duration_s * seg.scale_factor;
  }
  return spans;
}

// Pearson chi-square statistic for observed counts against equal expectation.
inline double chi_square_uniform(const std::vector<std::size_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

// Upper chi-square quantile at p = 0.001 via the Wilson-Hilferty approximation.
inline double chi_square_critical_999(std::size_t dof) {
  const double k = static_cast<double>(dof);
  const double z = 3.090232306167813;
  const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  return k * t * t * t;
}

}  // namespace oracle
