// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace avtime {

/// One trimmed source clip and its caption.
///
/// `caption` may be empty only for label-only (AudioSet-style) records, which
/// must then carry at least one label.
struct TrimmedClip {
  std::string id;
  double duration_s = 0.0;
  std::string caption;
  std::optional<std::vector<double>> embedding;
  std::optional<std::vector<std::string>> labels;

  bool operator==(const TrimmedClip&) const = default;
};

/// Immutable, validated collection of clips.
///
/// Either every clip carries an embedding of length embedding_dim(), or none
/// does and embedding_dim() is 0.
class Corpus {
 public:
  Corpus() = default;

  /// Throws ValidationError on a duplicate id, a non-positive duration, a
  /// missing caption (without labels) or inconsistent embeddings.
  explicit Corpus(std::vector<TrimmedClip> clips);

  const std::vector<TrimmedClip>& clips() const noexcept { return clips_; }
  std::size_t size() const noexcept { return clips_.size(); }
  bool empty() const noexcept { return clips_.empty(); }
  std::size_t embedding_dim() const noexcept { return embedding_dim_; }
  bool has_embeddings() const noexcept { return embedding_dim_ > 0; }

  const TrimmedClip& operator[](std::size_t i) const { return clips_[i]; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  bool operator==(const Corpus& other) const {
    return embedding_dim_ == other.embedding_dim_ && clips_ == other.clips_;
  }

 private:
  std::vector<TrimmedClip> clips_;
  std::size_t embedding_dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Checks a single clip's own invariants; throws ValidationError naming the id.
void validate_clip(const TrimmedClip& clip);

struct LoadOptions {
  /// Raw float32 matrix (see matrix_io.hpp) whose rows are referenced by the
  /// "embedding_row" field of clip records.
  std::optional<std::filesystem::path> embeddings_sidecar;
};

/// Reads a JSON Lines clip file. Blank lines are skipped. Errors carry the
/// 1-based line number of the offending record.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});

/// Writes one record per line with inline embeddings.
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Deterministic bag-of-words embedding used when no text encoder is
/// available. Tokens are split on Unicode whitespace, ASCII-lowercased and
/// stripped of leading/trailing ASCII punctuation; each token is hashed with
/// the seed into a bucket with a +1/-1 sign. The result is L2-normalized.
///
/// Throws ValidationError when dim < 2.
std::vector<double> hash_embed(std::string_view caption, std::size_t dim, std::uint64_t seed);

/// Whitespace tokenizer used by hash_embed.
std::vector<std::string> tokenize(std::string_view text);

/// Returns a copy of `corpus` with every embedding replaced by hash_embed of
/// the caption (labels joined by spaces for label-only clips).
Corpus with_hash_embeddings(const Corpus& corpus, std::size_t dim, std::uint64_t seed);

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace avtime
