// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/synthesizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "avtime/error.hpp"
#include "jsonl.hpp"

namespace avtime {
namespace {

using detail::json;

}  // namespace

ScaleGrid make_scale_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo > 0.0) || hi < lo || !std::isfinite(hi)) {
    throw ValidationError("scale grid needs 0 < lo <= hi and step > 0");
  }
  // Work in units of the step so 0.5..2.0 by 0.1 yields exactly 5/10 .. 20/10.
  const double lo_units = lo / step;
  const double hi_units = hi / step;
  const auto first = static_cast<long long>(std::llround(lo_units));
  const auto last = static_cast<long long>(std::llround(hi_units));
  const bool integral = std::abs(lo_units - static_cast<double>(first)) < 1e-9 &&
                        std::abs(hi_units - static_cast<double>(last)) < 1e-9;
  ScaleGrid grid;
  if (integral) {
    const double inv_step = std::round(1.0 / step);
    const bool decimal = std::abs(inv_step * step - 1.0) < 1e-12;
    for (long long u = first; u <= last; ++u) {
      grid.push_back(decimal ? static_cast<double>(u) / inv_step
                             : static_cast<double>(u) * step);
    }
  } else {
    for (long long i = 0; lo + static_cast<double>(i) * step <= hi + 1e-12; ++i) {
      grid.push_back(lo + static_cast<double>(i) * step);
    }
  }
  return grid;
}

const ScaleGrid& default_scale_grid() {
  static const ScaleGrid grid = make_scale_grid(0.5, 2.0, 0.1);
  return grid;
}

std::vector<TrimmedClip> select_clips(std::span<const TrimmedClip> cluster_members,
                                      std::size_t m, Rng& rng) {
  if (m < 1 || m > cluster_members.size()) {
    throw ValidationError("select_clips: m = " + std::to_string(m) + " must be in [1, " +
                          std::to_string(cluster_members.size()) + "]");
  }
  std::vector<std::size_t> idx(cluster_members.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<TrimmedClip> picked;
  picked.reserve(m);
  // Partial Fisher-Yates: position i receives a uniform draw from the rest.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.uniform_index(idx.size() - i);
    std::swap(idx[i], idx[j]);
    picked.push_back(cluster_members[idx[i]]);
  }
  return picked;
}

ScaledSegment make_segment(const TrimmedClip& clip, double scale_factor) {
  if (!(scale_factor > 0.0) || !std::isfinite(scale_factor)) {
    throw ValidationError("scale factor must be positive");
  }
  ScaledSegment seg;
  seg.clip_id = clip.id;
  seg.caption = clip.caption;
  seg.scale_factor = scale_factor;
  seg.original_duration_s = clip.duration_s;
  seg.scaled_duration_s = clip.duration_s * scale_factor;
  seg.caption_duration_s = clip.duration_s;
  return seg;
}

ScaledSegment scale_segment(const TrimmedClip& clip, Rng& rng, const ScaleGrid& grid) {
  if (grid.empty()) throw ValidationError("scale_segment: empty scale grid");
  return make_segment(clip, grid[rng.uniform_index(grid.size())]);
}

PseudoUntrimmedVideo concatenate(std::vector<ScaledSegment> ordered_segments) {
  if (ordered_segments.empty()) throw ValidationError("cannot assemble an empty segment list");
  PseudoUntrimmedVideo video;
  double offset = 0.0;
  for (std::size_t i = 0; i < ordered_segments.size(); ++i) {
    const auto& seg = ordered_segments[i];
    TemporalAnnotation ann;
    ann.caption = seg.caption;
    ann.segment_index = i;
    ann.start_s = offset;
    ann.end_s = offset + seg.caption_duration_s * seg.scale_factor;
    video.annotations.push_back(std::move(ann));
    offset += seg.scaled_duration_s;
  }
  video.total_duration_s = offset;
  video.segments = std::move(ordered_segments);
  return video;
}

PseudoUntrimmedVideo assemble(std::vector<ScaledSegment> segments, Rng& rng) {
  if (segments.empty()) throw ValidationError("cannot assemble an empty segment list");
  for (std::size_t i = segments.size() - 1; i > 0; --i) {
    std::swap(segments[i], segments[rng.uniform_index(i + 1)]);
  }
  return concatenate(std::move(segments));
}

std::string video_id(std::size_t cluster_id, std::size_t video_index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "pu-%07zu-%03zu", cluster_id, video_index);
  return buf;
}

std::vector<PseudoUntrimmedVideo> build_cluster_videos(std::span<const TrimmedClip> members,
                                                       std::size_t cluster_id,
                                                       const SynthesisConfig& config) {
  if (config.m_min < 1 || config.m_max < config.m_min) {
    throw ValidationError("segment count range must satisfy 1 <= m_min <= m_max");
  }
  if (config.grid.empty()) throw ValidationError("empty scale grid");
  std::vector<PseudoUntrimmedVideo> videos;
  if (members.size() < config.m_min) return videos;

  const std::size_t m_hi = std::min(config.m_max, members.size());
  for (std::size_t v = 0; v < config.videos_per_cluster; ++v) {
    Rng rng(derive_seed(config.master_seed, cluster_id, v));
    const auto m = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(config.m_min), static_cast<std::int64_t>(m_hi)));
    std::vector<ScaledSegment> segments;
    segments.reserve(m);
    for (const auto& clip : select_clips(members, m, rng)) {
      segments.push_back(scale_segment(clip, rng, config.grid));
    }
    auto video = assemble(std::move(segments), rng);
    video.id = video_id(cluster_id, v);
    video.source_cluster = cluster_id;
    videos.push_back(std::move(video));
  }
  return videos;
}

SynthesisResult build_dataset(const Corpus& corpus, const ClusterAssignment& assignment,
                              const SynthesisConfig& config) {
  validate_assignment(assignment);
  SynthesisResult result;
  std::vector<std::vector<TrimmedClip>> groups(assignment.cluster_count);
  for (std::size_t i = 0; i < assignment.clip_ids.size(); ++i) {
    const auto row = corpus.index_of(assignment.clip_ids[i]);
    if (!row) {
      throw ValidationError("assignment references unknown clip \"" + assignment.clip_ids[i] + "\"");
    }
    groups[assignment.cluster_of[i]].push_back(corpus[*row]);
  }
  // Members in corpus order so the draw does not depend on assignment file order.
  for (auto& g : groups) {
    std::sort(g.begin(), g.end(), [&](const TrimmedClip& a, const TrimmedClip& b) {
      return *corpus.index_of(a.id) < *corpus.index_of(b.id);
    });
  }
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].size() < config.m_min) {
      ++result.skipped_clusters;
      continue;
    }
    auto videos = build_cluster_videos(groups[c], c, config);
    std::move(videos.begin(), videos.end(), std::back_inserter(result.videos));
  }
  std::stable_sort(result.videos.begin(), result.videos.end(),
                   [](const auto& a, const auto& b) { return a.id < b.id; });
  return result;
}

void validate_video(const PseudoUntrimmedVideo& video, const SynthesisConfig& config,
                    double tolerance_s) {
  const std::string ctx = "video \"" + video.id + "\": ";
  const std::size_t n = video.segments.size();
  if (n < config.m_min || n > config.m_max) {
    throw ValidationError(ctx + std::to_string(n) + " segments outside [" +
                          std::to_string(config.m_min) + ", " + std::to_string(config.m_max) + "]");
  }
  if (video.annotations.size() != n) throw ValidationError(ctx + "annotation count mismatch");
  double sum_scaled = 0.0, sum_lengths = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& seg = video.segments[i];
    const auto& ann = video.annotations[i];
    if (std::find(config.grid.begin(), config.grid.end(), seg.scale_factor) == config.grid.end()) {
      throw ValidationError(ctx + "scale factor not on the grid");
    }
    if (std::abs(seg.scaled_duration_s - seg.original_duration_s * seg.scale_factor) > tolerance_s) {
      throw ValidationError(ctx + "scaled duration != original x scale");
    }
    if (std::abs((ann.end_s - ann.start_s) - seg.original_duration_s * seg.scale_factor) > tolerance_s) {
      throw ValidationError(ctx + "annotation length != original x scale");
    }
    if (!(ann.start_s < ann.end_s) || ann.start_s < 0.0 ||
        ann.end_s > video.total_duration_s + tolerance_s) {
      throw ValidationError(ctx + "annotation outside the video");
    }
    if (i == 0 ? ann.start_s != 0.0 : ann.start_s != video.annotations[i - 1].end_s) {
      throw ValidationError(ctx + "annotations are not contiguous");
    }
    sum_scaled += seg.scaled_duration_s;
    sum_lengths += ann.end_s - ann.start_s;
  }
  if (std::abs(sum_scaled - video.total_duration_s) > tolerance_s ||
      std::abs(sum_lengths - video.total_duration_s) > tolerance_s ||
      std::abs(video.annotations.back().end_s - video.total_duration_s) > tolerance_s) {
    throw ValidationError(ctx + "annotations do not cover the video");
  }
}

std::string manifest_line(const PseudoUntrimmedVideo& video) {
  json rec = json::object();
  rec["id"] = video.id;
  rec["cluster"] = video.source_cluster;
  rec["total_duration_s"] = video.total_duration_s;
  json segments = json::array();
  for (const auto& seg : video.segments) {
    json s = json::object();
    s["clip_id"] = seg.clip_id;
    s["scale"] = seg.scale_factor;
    s["scaled_duration_s"] = seg.scaled_duration_s;
    s["original_duration_s"] = seg.original_duration_s;
    segments.push_back(std::move(s));
  }
  rec["segments"] = std::move(segments);
  json annotations = json::array();
  for (const auto& ann : video.annotations) {
    json a = json::object();
    a["caption"] = ann.caption;
    a["start_s"] = ann.start_s;
    a["end_s"] = ann.end_s;
    annotations.push_back(std::move(a));
  }
  rec["annotations"] = std::move(annotations);
  return detail::dump_line(rec);
}

void write_manifest(std::span<const PseudoUntrimmedVideo> videos, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (const auto& video : videos) out << manifest_line(video) << '\n';
  detail::finish_write(out, path);
}

std::vector<PseudoUntrimmedVideo> read_manifest(const std::filesystem::path& path) {
  std::vector<PseudoUntrimmedVideo> videos;
  detail::for_each_jsonl(path, [&](const json& rec, std::size_t line_no) {
    const std::string ctx = detail::where(path, line_no);
    PseudoUntrimmedVideo video;
    video.id = detail::require<std::string>(rec, "id", ctx);
    video.source_cluster = detail::require<std::size_t>(rec, "cluster", ctx);
    video.total_duration_s = detail::require_number(rec, "total_duration_s", ctx);
    const auto segments = detail::require<json>(rec, "segments", ctx);
    const auto annotations = detail::require<json>(rec, "annotations", ctx);
    if (!segments.is_array() || !annotations.is_array()) {
      throw ValidationError(ctx + ": segments and annotations must be arrays");
    }
    if (!segments.empty() && segments.size() != annotations.size()) {
      throw ValidationError(ctx + ": segment and annotation counts differ");
    }
    for (std::size_t i = 0; i < annotations.size(); ++i) {
      const auto& a = annotations[i];
      TemporalAnnotation ann;
      ann.caption = detail::require<std::string>(a, "caption", ctx);
      ann.start_s = detail::require_number(a, "start_s", ctx);
      ann.end_s = detail::require_number(a, "end_s", ctx);
      ann.segment_index = i;
      if (!(ann.start_s < ann.end_s) || ann.start_s < 0.0) {
        throw ValidationError(ctx + ": annotation " + std::to_string(i) + " has start >= end");
      }
      video.annotations.push_back(std::move(ann));
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      ScaledSegment seg;
      seg.clip_id = detail::require<std::string>(s, "clip_id", ctx);
      seg.caption = video.annotations[i].caption;
      seg.scale_factor = detail::require_number(s, "scale", ctx);
      seg.scaled_duration_s = detail::require_number(s, "scaled_duration_s", ctx);
      seg.original_duration_s = s.contains("original_duration_s")
                                    ? detail::require_number(s, "original_duration_s", ctx)
                                    : seg.scaled_duration_s / seg.scale_factor;
      seg.caption_duration_s = seg.original_duration_s;
      video.segments.push_back(std::move(seg));
    }
    videos.push_back(std::move(video));
  });
  return videos;
}

}  // namespace avtime
