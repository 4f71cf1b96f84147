// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "avtime/clusterer.hpp"
#include "avtime/corpus.hpp"
#include "avtime/rng.hpp"

namespace avtime {

/// A trimmed clip after random temporal scaling.
struct ScaledSegment {
  std::string clip_id;
  std::string caption;
  double scale_factor = 1.0;
  double original_duration_s = 0.0;
  /// original_duration_s * scale_factor.
  double scaled_duration_s = 0.0;
  /// Length of the captioned span inside the original clip. Captions cover
  /// whole clips, so this defaults to original_duration_s.
  double caption_duration_s = 0.0;

  bool operator==(const ScaledSegment&) const = default;
};

struct TemporalAnnotation {
  std::string caption;
  double start_s = 0.0;
  double end_s = 0.0;
  std::size_t segment_index = 0;

  bool operator==(const TemporalAnnotation&) const = default;
};

/// Concatenation of scaled segments in permuted order with the resulting
/// boundary annotations.
struct PseudoUntrimmedVideo {
  std::string id;
  std::size_t source_cluster = 0;
  std::vector<ScaledSegment> segments;
  double total_duration_s = 0.0;
  std::vector<TemporalAnnotation> annotations;

  bool operator==(const PseudoUntrimmedVideo&) const = default;
};

/// Discrete set of playback-speed factors.
using ScaleGrid = std::vector<double>;

/// {lo, lo + step, ..., hi}; values are computed as integer multiples of the
/// step to avoid drift. Throws ValidationError on an empty or inverted range.
ScaleGrid make_scale_grid(double lo, double hi, double step);

/// 0.5 to 2.0 in steps of 0.1 (16 values).
const ScaleGrid& default_scale_grid();

inline constexpr std::size_t kDefaultMinSegments = 3;
inline constexpr std::size_t kDefaultMaxSegments = 20;

struct SynthesisConfig {
  std::size_t m_min = kDefaultMinSegments;
  std::size_t m_max = kDefaultMaxSegments;
  ScaleGrid grid = default_scale_grid();
  std::size_t videos_per_cluster = 1;
  std::uint64_t master_seed = 0;
};

/// m distinct members drawn uniformly without replacement, in draw order.
std::vector<TrimmedClip> select_clips(std::span<const TrimmedClip> cluster_members,
                                      std::size_t m, Rng& rng);

/// Scales with an explicit factor.
ScaledSegment make_segment(const TrimmedClip& clip, double scale_factor);

/// Scales with a factor drawn uniformly from `grid`.
ScaledSegment scale_segment(const TrimmedClip& clip, Rng& rng, const ScaleGrid& grid);

/// Concatenates segments in the given order and annotates them.
PseudoUntrimmedVideo concatenate(std::vector<ScaledSegment> ordered_segments);

/// Shuffles segments with Fisher-Yates, then concatenates.
PseudoUntrimmedVideo assemble(std::vector<ScaledSegment> segments, Rng& rng);

struct SynthesisResult {
  std::vector<PseudoUntrimmedVideo> videos;
  std::size_t skipped_clusters = 0;
};

/// "pu-<cluster:07>-<index:03>"
std::string video_id(std::size_t cluster_id, std::size_t video_index);

/// Generates the videos of one cluster. Members must all belong to
/// `cluster_id`; returns nothing when fewer than m_min members exist. Output
/// depends only on (members, cluster_id, config), never on call order.
std::vector<PseudoUntrimmedVideo> build_cluster_videos(std::span<const TrimmedClip> members,
                                                       std::size_t cluster_id,
                                                       const SynthesisConfig& config);

/// Runs build_cluster_videos over every cluster; videos are sorted by id.
SynthesisResult build_dataset(const Corpus& corpus, const ClusterAssignment& assignment,
                              const SynthesisConfig& config);

/// Throws ValidationError if the segment/annotation bookkeeping is inconsistent
/// (coverage, contiguity, length = original x scale).
void validate_video(const PseudoUntrimmedVideo& video, const SynthesisConfig& config,
                    double tolerance_s = 1e-9);

std::string manifest_line(const PseudoUntrimmedVideo& video);
void write_manifest(std::span<const PseudoUntrimmedVideo> videos, const std::filesystem::path& path);
std::vector<PseudoUntrimmedVideo> read_manifest(const std::filesystem::path& path);

}  // namespace avtime
