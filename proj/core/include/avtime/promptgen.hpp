// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "avtime/corpus.hpp"
#include "avtime/rng.hpp"
#include "avtime/synthesizer.hpp"

namespace avtime {

inline constexpr std::size_t kDefaultContextLength = 100;

/// Placeholder for the temporal expression inside context-boundary queries.
inline constexpr std::string_view kTauPlaceholder = "<tau>";
/// Single-event slot in label templates.
inline constexpr std::string_view kEventPlaceholder = "<event>";
/// Multi-event slot in label templates; replaced by the labels joined with ", ".
inline constexpr std::string_view kEventListPlaceholder = "<event>_1, <event>_2, ...";

enum class Arity { single, multi };

struct ResponseTemplate {
  std::string text;
  Arity arity = Arity::single;

  bool operator==(const ResponseTemplate&) const = default;
};

struct TemplateBank {
  /// Audio captioning queries.
  std::vector<std::string> audio_caption_queries;
  /// Time-referenced queries; each contains kTauPlaceholder.
  std::vector<std::string> cba_queries;
  /// Time-agnostic queries that ask what happens and when.
  std::vector<std::string> taq_queries;
  /// Label-to-response templates, prefix and suffix style.
  std::vector<ResponseTemplate> audioset_prefix;
  std::vector<ResponseTemplate> audioset_suffix;

  bool operator==(const TemplateBank&) const = default;
};

/// Built-in bank: 9 audio captioning queries, 7 context-boundary queries,
/// 10 prefix and 12 suffix label templates, plus 3 time-agnostic queries.
const TemplateBank& default_template_bank();

/// Throws ValidationError on an empty list, a cba query without kTauPlaceholder
/// or a label template without the placeholder matching its arity.
void validate_bank(const TemplateBank& bank);

TemplateBank load_template_bank(const std::filesystem::path& path);
void write_template_bank(const TemplateBank& bank, const std::filesystem::path& path);

/// Token-percentile temporal expression "from {start} to {end}".
struct Tau {
  int start = 0;
  int end = 0;
  std::string text;

  bool operator==(const Tau&) const = default;
};

std::string tau_text(int start, int end);

/// Encodes [start_s, end_s] as the nearest token-aligned span on a timeline
/// of T tokens: start = round(start_s * T / total), end = round(end_s * T /
/// total) - 1, both clamped to [0, T-1] with end >= start. Token k covers
/// [k/T, (k+1)/T) of the video.
///
/// Throws ValidationError unless 0 <= start_s <= end_s <= total_duration_s,
/// total_duration_s > 0 and T >= 1.
Tau format_interval(double start_s, double end_s, double total_duration_s, std::size_t T);

enum class PairKind { tq_tar, taq_tr, audio_caption, audioset_label, plain };

std::string_view to_string(PairKind kind);
PairKind parse_pair_kind(std::string_view text);

struct QAPair {
  std::string video_id;
  PairKind kind = PairKind::plain;
  std::string query;
  std::string response;
  std::optional<std::pair<int, int>> tau;

  bool operator==(const QAPair&) const = default;
};

/// True if `text` contains "from <int> to <int>".
bool contains_tau(std::string_view text);

/// Substitutes a tau expression into a context-boundary query.
std::string render_cba_query(std::string_view query_template, std::string_view tau);

/// Fills a label template. Multi-arity templates take the labels joined by
/// ", "; single-arity templates require exactly one label.
std::string render_label_response(const ResponseTemplate& tmpl,
                                  std::span<const std::string> labels);

/// "{caption}, from {s} to {e}." with trailing punctuation of the caption
/// dropped.
std::string render_taq_response(std::string_view caption, std::string_view tau);

struct PairGenResult {
  std::vector<QAPair> pairs;
  /// Annotations skipped because the caption itself contains a tau pattern.
  std::size_t skipped_annotations = 0;
};

/// One time-referenced-query pair and one time-referenced-response pair per
/// annotation. Templates are drawn uniformly from `bank` with `rng`.
PairGenResult gen_cba_pairs(const PseudoUntrimmedVideo& video, const TemplateBank& bank,
                            Rng& rng, std::size_t T = kDefaultContextLength);

/// Audio captioning pair for a clip. Captioned clips answer with the caption;
/// label-only clips answer with a label template whose arity matches the
/// label count. Throws ValidationError when the clip has neither.
QAPair gen_audio_pairs(const TrimmedClip& clip, const TemplateBank& bank, Rng& rng);

/// Throws ValidationError when a pair violates its kind's tau invariant.
void validate_pair(const QAPair& pair, std::size_t T = kDefaultContextLength);

std::string pair_to_json_line(const QAPair& pair);
QAPair pair_from_json_line(std::string_view line);
void write_pairs(std::span<const QAPair> pairs, const std::filesystem::path& path);

}  // namespace avtime
