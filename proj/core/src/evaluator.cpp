// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <unordered_map>

#include "avtime/error.hpp"
#include "jsonl.hpp"

namespace avtime {
namespace {

using detail::json;

void check_interval(double start, double end, std::string_view what) {
  if (!std::isfinite(start) || !std::isfinite(end) || !(start < end)) {
    throw ValidationError(std::string(what) + ": interval needs finite start < end");
  }
}

void check_inputs(std::span<const Prediction> preds, std::span<const GroundTruth> gts) {
  for (const auto& p : preds) {
    check_interval(p.start_s, p.end_s, "prediction for \"" + p.video_id + "\"");
    if (!std::isfinite(p.score)) {
      throw ValidationError("prediction for \"" + p.video_id + "\" has a non-finite score");
    }
  }
  for (const auto& g : gts) check_interval(g.start_s, g.end_s, "ground truth for \"" + g.video_id + "\"");
}

// Descending score, then earlier start, then video id.
std::vector<std::size_t> ranking(std::span<const Prediction> preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = preds[a];
    const auto& pb = preds[b];
    if (pa.score != pb.score) return pa.score > pb.score;
    if (pa.start_s != pb.start_s) return pa.start_s < pb.start_s;
    return pa.video_id < pb.video_id;
  });
  return order;
}

std::string threshold_key(double thr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", thr);
  return buf;
}

long long parse_index(const std::string& digits) {
  long long value = 0;
  const char* first = digits.data();
  const char* last = digits.data() + digits.size();
  const bool negative = !digits.empty() && digits.front() == '-';
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    return negative ? std::numeric_limits<long long>::min() : std::numeric_limits<long long>::max();
  }
  return value;
}

}  // namespace

double tiou(const Interval& a, const Interval& b) {
  check_interval(a.start, a.end, "tiou");
  check_interval(b.start, b.end, "tiou");
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  return inter / uni;
}

std::vector<double> threshold_range(int first, int last, int denominator) {
  std::vector<double> out;
  for (int k = first; k <= last; ++k) out.push_back(static_cast<double>(k) / denominator);
  return out;
}

const std::vector<double>& default_detail_thresholds() {
  static const std::vector<double> t = threshold_range(5, 9, 10);
  return t;
}

const std::vector<double>& default_average_thresholds() {
  static const std::vector<double> t = threshold_range(1, 9, 10);
  return t;
}

double ap_at(std::span<const Prediction> preds, std::span<const GroundTruth> gts, double thr) {
  if (gts.empty()) return 0.0;
  std::unordered_map<std::string_view, std::vector<std::size_t>> by_video;
  for (std::size_t i = 0; i < gts.size(); ++i) by_video[gts[i].video_id].push_back(i);

  std::vector<bool> matched(gts.size(), false);
  std::size_t true_positives = 0;
  double ap = 0.0;
  const auto order = ranking(preds);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& p = preds[order[rank]];
    const auto it = by_video.find(p.video_id);
    if (it == by_video.end()) continue;
    std::size_t best = gts.size();
    double best_iou = -1.0;
    for (std::size_t g : it->second) {
      if (matched[g]) continue;
      const double iou = tiou({p.start_s, p.end_s}, {gts[g].start_s, gts[g].end_s});
      if (iou >= thr && iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    if (best == gts.size()) continue;
    matched[best] = true;
    ++true_positives;
    ap += static_cast<double>(true_positives) / static_cast<double>(rank + 1);
  }
  return ap / static_cast<double>(gts.size());
}

EvalReport evaluate_avedl(std::span<const Prediction> preds, std::span<const GroundTruth> gts,
                          std::span<const double> detail_thresholds,
                          std::span<const double> avg_thresholds) {
  if (gts.empty()) throw ValidationError("evaluate_avedl: empty ground truth");
  check_inputs(preds, gts);

  std::map<std::string, std::pair<std::vector<Prediction>, std::vector<GroundTruth>>> by_class;
  std::set<std::string> videos;
  for (const auto& g : gts) {
    by_class[g.label].second.push_back(g);
    videos.insert(g.video_id);
  }
  std::set<std::string> ignored;
  for (const auto& p : preds) {
    if (auto it = by_class.find(p.label); it != by_class.end()) {
      it->second.first.push_back(p);
    } else {
      ignored.insert(p.label);
    }
  }

  std::map<double, double> cache;
  auto map_at = [&](double thr) {
    if (auto it = cache.find(thr); it != cache.end()) return it->second;
    double sum = 0.0;
    for (const auto& [label, data] : by_class) sum += ap_at(data.first, data.second, thr);
    const double value = sum / static_cast<double>(by_class.size());
    cache.emplace(thr, value);
    return value;
  };

  EvalReport report;
  for (double thr : detail_thresholds) report.map_at.push_back({thr, map_at(thr)});
  if (!avg_thresholds.empty()) {
    double sum = 0.0;
    for (double thr : avg_thresholds) sum += map_at(thr);
    report.avg_map = sum / static_cast<double>(avg_thresholds.size());
  }
  report.videos = videos.size();
  report.classes = by_class.size();
  report.predictions = preds.size();
  for (const auto& label : ignored) {
    report.warnings.push_back("predictions for class \"" + label +
                              "\" ignored: class absent from ground truth");
  }
  return report;
}

EvalReport evaluate_vtg(std::span<const Prediction> preds, std::span<const GroundTruth> gts,
                        std::span<const double> recall_thresholds) {
  if (gts.empty()) throw ValidationError("evaluate_vtg: empty ground truth");
  check_inputs(preds, gts);
  static const std::vector<double> kDefaultRecall{0.5, 0.7};
  if (recall_thresholds.empty()) recall_thresholds = kDefaultRecall;

  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::size_t> gt_of;
  std::set<std::string> videos;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!gt_of.emplace(Key{gts[i].video_id, gts[i].label}, i).second) {
      throw ValidationError("evaluate_vtg: duplicate ground truth for query (\"" +
                            gts[i].video_id + "\", \"" + gts[i].label + "\")");
    }
    videos.insert(gts[i].video_id);
  }

  std::map<Key, std::size_t> top1;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Key key{preds[i].video_id, preds[i].label};
    if (!gt_of.contains(key)) continue;
    auto [it, fresh] = top1.emplace(key, i);
    if (fresh) continue;
    const auto& cur = preds[it->second];
    const auto& cand = preds[i];
    if (cand.score > cur.score || (cand.score == cur.score && cand.start_s < cur.start_s)) {
      it->second = i;
    }
  }

  std::vector<double> ious;
  ious.reserve(gt_of.size());
  for (const auto& [key, g] : gt_of) {
    const auto it = top1.find(key);
    if (it == top1.end()) {
      ious.push_back(0.0);
      continue;
    }
    const auto& p = preds[it->second];
    ious.push_back(tiou({p.start_s, p.end_s}, {gts[g].start_s, gts[g].end_s}));
  }

  EvalReport report;
  const auto n = static_cast<double>(ious.size());
  for (double thr : recall_thresholds) {
    const auto hits = std::count_if(ious.begin(), ious.end(), [&](double v) { return v >= thr; });
    report.r1_at.push_back({thr, static_cast<double>(hits) / n});
  }
  report.miou = std::accumulate(ious.begin(), ious.end(), 0.0) / n;
  report.videos = videos.size();
  report.classes = gt_of.size();
  report.predictions = preds.size();
  if (top1.size() < gt_of.size()) {
    report.warnings.push_back(std::to_string(gt_of.size() - top1.size()) +
                              " queries have no prediction and score IoU 0");
  }
  return report;
}

ParseResult parse_response(std::string_view text, double total_duration_s, std::size_t T) {
  if (T < 1) throw ValidationError("parse_response: T must be at least 1");
  if (!(total_duration_s > 0.0)) throw ValidationError("parse_response: total duration must be positive");

  ParseResult result;
  const long long last = static_cast<long long>(T) - 1;
  const double tokens = static_cast<double>(T);
  auto add = [&](std::optional<std::string> label, long long s, long long e) {
    if (s < 0 || s > last || e < 0 || e > last) {
      result.warnings.push_back("token index out of range in (" + std::to_string(s) + ", " +
                                std::to_string(e) + "); clamped to [0, " + std::to_string(last) + "]");
      s = std::clamp(s, 0LL, last);
      e = std::clamp(e, 0LL, last);
    }
    if (s > e) {
      result.warnings.push_back("dropped interval with start " + std::to_string(s) + " > end " +
                                std::to_string(e));
      return;
    }
    ParsedEvent ev;
    ev.label = std::move(label);
    ev.start_s = static_cast<double>(s) * total_duration_s / tokens;
    ev.end_s = e == last ? total_duration_s
                         : static_cast<double>(e + 1) * total_duration_s / tokens;
    result.events.push_back(std::move(ev));
  };

  const json doc = json::parse(text, nullptr, false);
  if (!doc.is_discarded() && doc.is_object() && doc.contains("events") && doc["events"].is_array()) {
    for (const auto& ev : doc["events"]) {
      const bool ok = ev.is_object() && ev.contains("start") && ev.contains("end") &&
                      ev["start"].is_number_integer() && ev["end"].is_number_integer();
      if (!ok) {
        result.warnings.push_back("skipped event without integer start/end");
        continue;
      }
      std::optional<std::string> label;
      if (auto d = ev.find("description"); d != ev.end() && d->is_string()) label = d->get<std::string>();
      add(std::move(label), ev["start"].get<long long>(), ev["end"].get<long long>());
    }
    return result;
  }

  static const std::regex re(R"(\bfrom\s+(-?\d+)\s+to\s+(-?\d+))", std::regex::icase);
  for (auto it = std::regex_iterator<std::string_view::const_iterator>(text.begin(), text.end(), re);
       it != std::regex_iterator<std::string_view::const_iterator>(); ++it) {
    add(std::nullopt, parse_index((*it)[1].str()), parse_index((*it)[2].str()));
  }
  return result;
}

std::vector<Prediction> predictions_from_response(std::string_view video_id,
                                                  std::string_view response,
                                                  double total_duration_s, std::size_t T,
                                                  std::string_view default_label, double score) {
  std::vector<Prediction> out;
  for (auto& ev : parse_response(response, total_duration_s, T).events) {
    Prediction p;
    p.video_id = std::string(video_id);
    p.label = ev.label ? std::move(*ev.label) : std::string(default_label);
    p.start_s = ev.start_s;
    p.end_s = ev.end_s;
    p.score = score;
    out.push_back(std::move(p));
  }
  return out;
}

const std::vector<int>& default_air_grid_percent() {
  static const std::vector<int> grid{0, 10, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100};
  return grid;
}

std::vector<AirRow> sweep_air(
    std::span<const int> air_percent,
    const std::function<std::optional<std::vector<Prediction>>(int air_percent)>& predict,
    std::span<const GroundTruth> gts) {
  std::vector<AirRow> rows;
  for (int air : air_percent) {
    auto preds = predict(air);
    if (!preds) continue;
    rows.push_back({air, evaluate_avedl(*preds, gts)});
  }
  return rows;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  detail::for_each_jsonl(path, [&](const json& rec, std::size_t line_no) {
    const std::string ctx = detail::where(path, line_no);
    Prediction p;
    p.video_id = detail::require<std::string>(rec, "video_id", ctx);
    if (rec.contains("label")) p.label = detail::require<std::string>(rec, "label", ctx);
    p.start_s = detail::require_number(rec, "start_s", ctx);
    p.end_s = detail::require_number(rec, "end_s", ctx);
    if (rec.contains("score")) p.score = detail::require_number(rec, "score", ctx);
    try {
      check_inputs(std::span(&p, 1), {});
    } catch (const ValidationError& e) {
      throw ValidationError(ctx + ": " + e.what());
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& path) {
  std::vector<GroundTruth> out;
  detail::for_each_jsonl(path, [&](const json& rec, std::size_t line_no) {
    const std::string ctx = detail::where(path, line_no);
    GroundTruth g;
    g.video_id = detail::require<std::string>(rec, "video_id", ctx);
    if (rec.contains("label")) g.label = detail::require<std::string>(rec, "label", ctx);
    g.start_s = detail::require_number(rec, "start_s", ctx);
    g.end_s = detail::require_number(rec, "end_s", ctx);
    try {
      check_interval(g.start_s, g.end_s, "ground truth");
    } catch (const ValidationError& e) {
      throw ValidationError(ctx + ": " + e.what());
    }
    out.push_back(std::move(g));
  });
  return out;
}

void write_predictions(std::span<const Prediction> preds, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (const auto& p : preds) {
    json rec = {{"video_id", p.video_id}, {"label", p.label}, {"start_s", p.start_s},
                {"end_s", p.end_s}, {"score", p.score}};
    out << detail::dump_line(rec) << '\n';
  }
  detail::finish_write(out, path);
}

void write_ground_truth(std::span<const GroundTruth> gts, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (const auto& g : gts) {
    json rec = {{"video_id", g.video_id}, {"label", g.label}, {"start_s", g.start_s},
                {"end_s", g.end_s}};
    out << detail::dump_line(rec) << '\n';
  }
  detail::finish_write(out, path);
}

namespace {

json report_json(const EvalReport& report) {
  json doc = json::object();
  if (!report.map_at.empty()) {
    json m = json::object();
    for (const auto& s : report.map_at) m[threshold_key(s.threshold)] = s.value;
    doc["map_at"] = std::move(m);
    doc["avg_map"] = report.avg_map;
  }
  if (!report.r1_at.empty()) {
    json r = json::object();
    for (const auto& s : report.r1_at) r[threshold_key(s.threshold)] = s.value;
    doc["r1_at"] = std::move(r);
    doc["miou"] = report.miou;
  }
  doc["counts"] = {{"videos", report.videos}, {"classes", report.classes},
                   {"predictions", report.predictions}};
  doc["warnings"] = report.warnings;
  return doc;
}

std::string percent_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%7.1f", 100.0 * v);
  return buf;
}

std::string label_cell(std::string_view label) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-14.*s", static_cast<int>(std::min<std::size_t>(label.size(), 40)),
                label.data());
  return buf;
}

std::string avedl_header(std::string_view first, const EvalReport& report) {
  std::string line = label_cell(first);
  for (const auto& s : report.map_at) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%7s", threshold_key(s.threshold).c_str());
    line += buf;
  }
  line += "   Avg.\n";
  return line;
}

std::string avedl_row(std::string_view label, const EvalReport& report) {
  std::string line = label_cell(label);
  for (const auto& s : report.map_at) line += percent_cell(s.value);
  line += percent_cell(report.avg_map) + "\n";
  return line;
}

}  // namespace

std::string report_to_json(const EvalReport& report) { return report_json(report).dump(2); }

std::string avedl_table(const EvalReport& report, std::string_view row_label) {
  return avedl_header("AVEDL", report) + avedl_row(row_label, report);
}

std::string vtg_table(const EvalReport& report, std::string_view row_label) {
  std::string out = label_cell("VTG");
  for (const auto& s : report.r1_at) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%8s", ("R1@" + threshold_key(s.threshold)).c_str());
    out += buf;
  }
  out += "    mIoU\n" + label_cell(row_label);
  for (const auto& s : report.r1_at) out += " " + percent_cell(s.value);
  out += " " + percent_cell(report.miou) + "\n";
  return out;
}

std::string air_table(std::span<const AirRow> rows) {
  if (rows.empty()) return {};
  std::string out = avedl_header("rho", rows.front().report);
  for (const auto& row : rows) out += avedl_row(std::to_string(row.air_percent) + "%", row.report);
  return out;
}

std::string air_to_json(std::span<const AirRow> rows) {
  json doc = json::array();
  for (const auto& row : rows) {
    json r = report_json(row.report);
    r["air_percent"] = row.air_percent;
    doc.push_back(std::move(r));
  }
  return doc.dump(2);
}

}  // namespace avtime
