// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace avtime {

enum class Modality { video, audio };

std::string_view to_string(Modality modality);
/// Throws ValidationError for anything but "video" / "audio".
Modality parse_modality(std::string_view text);

/// Temporally ordered embedding rows of one modality.
class TokenSequence {
 public:
  TokenSequence() = default;
  /// `data` is row-major length x dim. Throws ValidationError on a size
  /// mismatch, dim == 0 or non-finite values.
  TokenSequence(Modality modality, std::size_t dim, std::vector<double> data);

  Modality modality() const noexcept { return modality_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t length() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }

  bool operator==(const TokenSequence&) const = default;

 private:
  Modality modality_ = Modality::video;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Linear interpolation along time. Output row j (1-based) samples the input
/// at position 1 + (j-1)(length-1)/(target_len-1), so both endpoints are kept.
/// Same length returns an exact copy; a single input row is repeated; a single
/// output row samples the temporal center.
///
/// Throws ValidationError when target_len < 1 or the input is empty.
TokenSequence resample(const TokenSequence& seq, std::size_t target_len);

/// Placement of audio and video slots in a context of length T.
struct SlotPattern {
  std::vector<Modality> tags;
  std::size_t n_audio = 0;
  std::size_t n_video = 0;
  /// floor((1 - rho) / rho); absent for rho == 0.
  std::optional<std::size_t> omega;
};

/// Audio occupies the 1-based positions divisible by omega + 1; rho == 0
/// yields an all-video pattern. Throws ValidationError for rho outside [0, 1]
/// or T < 1.
SlotPattern slot_pattern(std::size_t T, double rho);

struct ContextToken {
  Modality modality = Modality::video;
  /// 1-based index into the resampled sequence of this modality.
  std::size_t source_index = 0;
  std::vector<double> vector;

  bool operator==(const ContextToken&) const = default;
};

struct InterleavedContext {
  std::size_t T = 0;
  double rho = 0.0;
  std::optional<std::size_t> omega;
  std::size_t n_audio = 0;
  std::size_t n_video = 0;
  std::vector<ContextToken> tokens;

  std::vector<Modality> pattern() const;
  /// "V"/"A" per position.
  std::string pattern_string() const;

  bool operator==(const InterleavedContext&) const = default;
};

/// Resamples audio to n_audio and video to n_video rows and merges them. Audio
/// slot t takes resampled row t / (omega + 1); video slot t takes its rank
/// among video positions, t - floor(t / (omega + 1)). Every resampled row is
/// used exactly once and in order.
///
/// A modality may be absent only when its slot count is zero. Throws
/// ValidationError on a missing or mislabelled input, T < 1, or rho outside
/// [0, 1].
InterleavedContext interleave(const std::optional<TokenSequence>& video,
                              const std::optional<TokenSequence>& audio,
                              std::size_t T, double rho);

// {"modality": str, "dim": int, "data": [[float...]...]}
TokenSequence read_tokens_json(const std::filesystem::path& path);
void write_tokens_json(const TokenSequence& seq, const std::filesystem::path& path);
TokenSequence tokens_from_json_text(std::string_view text);
std::string tokens_to_json_text(const TokenSequence& seq);

/// Raw little-endian float32 rows plus a JSON header sidecar carrying the
/// modality.
TokenSequence read_tokens_raw(const std::filesystem::path& path);
void write_tokens_raw(const TokenSequence& seq, const std::filesystem::path& path);

std::string context_to_json_text(const InterleavedContext& context);
void write_context_json(const InterleavedContext& context, const std::filesystem::path& path);

}  // namespace avtime
