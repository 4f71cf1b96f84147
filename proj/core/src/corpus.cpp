// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "avtime/error.hpp"
#include "avtime/matrix_io.hpp"
#include "avtime/rng.hpp"
#include "jsonl.hpp"

namespace avtime {
namespace {

using detail::json;

bool is_unicode_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Decodes one UTF-8 sequence at text[pos]; malformed bytes decode as
// themselves so that tokenization never fails.
char32_t decode_utf8(std::string_view text, std::size_t pos, std::size_t& width) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= text.size()) return -1;
    const auto b = static_cast<unsigned char>(text[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    width = 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    if (int c1 = cont(1); c1 >= 0) {
      width = 2;
      return (char32_t(b0 & 0x1F) << 6) | char32_t(c1);
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      width = 3;
      return (char32_t(b0 & 0x0F) << 12) | (char32_t(c1) << 6) | char32_t(c2);
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      width = 4;
      return (char32_t(b0 & 0x07) << 18) | (char32_t(c1) << 12) | (char32_t(c2) << 6) |
             char32_t(c3);
    }
  }
  width = 1;
  return b0;
}

bool is_ascii_punct(char c) {
  return std::strchr("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~", c) != nullptr && c != '\0';
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string text_for_embedding(const TrimmedClip& clip) {
  if (!clip.caption.empty() || !clip.labels) return clip.caption;
  std::string joined;
  for (const auto& label : *clip.labels) {
    if (!joined.empty()) joined += ' ';
    joined += label;
  }
  return joined;
}

}  // namespace

void validate_clip(const TrimmedClip& clip) {
  if (clip.id.empty()) throw ValidationError("clip with empty id");
  if (!(clip.duration_s > 0.0) || !std::isfinite(clip.duration_s)) {
    throw ValidationError("clip \"" + clip.id + "\": duration_s must be positive and finite");
  }
  const bool has_labels = clip.labels && !clip.labels->empty();
  if (clip.caption.empty() && !has_labels) {
    throw ValidationError("clip \"" + clip.id + "\": needs a non-empty caption or labels");
  }
  if (clip.embedding) {
    if (clip.embedding->empty()) {
      throw ValidationError("clip \"" + clip.id + "\": empty embedding");
    }
    for (double v : *clip.embedding) {
      if (!std::isfinite(v)) {
        throw ValidationError("clip \"" + clip.id + "\": non-finite embedding value");
      }
    }
  }
}

Corpus::Corpus(std::vector<TrimmedClip> clips) : clips_(std::move(clips)) {
  index_.reserve(clips_.size());
  for (std::size_t i = 0; i < clips_.size(); ++i) {
    const auto& clip = clips_[i];
    validate_clip(clip);
    if (!index_.emplace(clip.id, i).second) {
      throw ValidationError("duplicate clip id \"" + clip.id + "\"");
    }
    const std::size_t dim = clip.embedding ? clip.embedding->size() : 0;
    if (i == 0) {
      embedding_dim_ = dim;
    } else if (dim != embedding_dim_) {
      throw ValidationError("clip \"" + clip.id + "\": embedding dimension " +
                            std::to_string(dim) + " differs from corpus dimension " +
                            std::to_string(embedding_dim_));
    }
  }
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
  if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
  return std::nullopt;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::optional<RawMatrix> sidecar;
  if (options.embeddings_sidecar) sidecar = read_raw_matrix(*options.embeddings_sidecar);

  std::vector<TrimmedClip> clips;
  std::vector<std::size_t> line_of;
  detail::for_each_jsonl(path, [&](const json& rec, std::size_t line_no) {
    const std::string ctx = detail::where(path, line_no);
    TrimmedClip clip;
    clip.id = detail::require<std::string>(rec, "id", ctx);
    clip.duration_s = detail::require_number(rec, "duration_s", ctx);
    if (auto it = rec.find("caption"); it != rec.end() && !it->is_null()) {
      clip.caption = detail::require<std::string>(rec, "caption", ctx);
    }
    if (auto it = rec.find("embedding"); it != rec.end() && !it->is_null()) {
      clip.embedding = detail::require<std::vector<double>>(rec, "embedding", ctx);
    } else if (auto row = rec.find("embedding_row"); row != rec.end()) {
      if (!sidecar) throw ValidationError(ctx + ": embedding_row given without a sidecar matrix");
      if (!row->is_number_unsigned() || row->get<std::size_t>() >= sidecar->rows) {
        throw ValidationError(ctx + ": embedding_row out of range");
      }
      const std::size_t r = row->get<std::size_t>();
      const auto first = sidecar->data.begin() + static_cast<std::ptrdiff_t>(r * sidecar->cols);
      clip.embedding.emplace(first, first + static_cast<std::ptrdiff_t>(sidecar->cols));
    }
    if (auto it = rec.find("labels"); it != rec.end() && !it->is_null()) {
      clip.labels = detail::require<std::vector<std::string>>(rec, "labels", ctx);
    }
    try {
      validate_clip(clip);
    } catch (const ValidationError& e) {
      throw ValidationError(ctx + ": " + e.what());
    }
    clips.push_back(std::move(clip));
    line_of.push_back(line_no);
  });

  // Corpus-level checks, re-reported with the offending line.
  std::unordered_map<std::string, std::size_t> seen;
  const std::size_t dim = clips.empty() || !clips[0].embedding ? 0 : clips[0].embedding->size();
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const std::string ctx = detail::where(path, line_of[i]);
    if (auto [it, fresh] = seen.emplace(clips[i].id, line_of[i]); !fresh) {
      throw ValidationError(ctx + ": duplicate clip id \"" + clips[i].id +
                            "\" (first seen on line " + std::to_string(it->second) + ")");
    }
    const std::size_t d = clips[i].embedding ? clips[i].embedding->size() : 0;
    if (d != dim) {
      throw ValidationError(ctx + ": clip \"" + clips[i].id + "\" has embedding dimension " +
                            std::to_string(d) + ", expected " + std::to_string(dim));
    }
  }
  return Corpus(std::move(clips));
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (const auto& clip : corpus.clips()) {
    json rec = json::object();
    rec["id"] = clip.id;
    rec["duration_s"] = clip.duration_s;
    rec["caption"] = clip.caption;
    if (clip.embedding) rec["embedding"] = *clip.embedding;
    if (clip.labels) rec["labels"] = *clip.labels;
    out << detail::dump_line(rec) << '\n';
  }
  detail::finish_write(out, path);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    std::size_t b = 0, e = current.size();
    while (b < e && is_ascii_punct(current[b])) ++b;
    while (e > b && is_ascii_punct(current[e - 1])) --e;
    if (e > b) tokens.emplace_back(current.substr(b, e - b));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t width = 1;
    const char32_t c = decode_utf8(text, pos, width);
    if (is_unicode_space(c)) {
      flush();
    } else {
      for (std::size_t i = 0; i < width; ++i) {
        char ch = text[pos + i];
        if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
        current.push_back(ch);
      }
    }
    pos += width;
  }
  flush();
  return tokens;
}

std::vector<double> hash_embed(std::string_view caption, std::size_t dim, std::uint64_t seed) {
  if (dim < 2) throw ValidationError("hash_embed: dim must be at least 2");
  std::vector<double> v(dim, 0.0);
  const std::uint64_t salt = mix64(seed);
  for (const auto& token : tokenize(caption)) {
    const std::uint64_t h = mix64(fnv1a64(token) ^ salt);
    v[h % dim] += (h >> 63) != 0 ? -1.0 : 1.0;
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    v[mix64(salt) % dim] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

Corpus with_hash_embeddings(const Corpus& corpus, std::size_t dim, std::uint64_t seed) {
  std::vector<TrimmedClip> clips = corpus.clips();
  for (auto& clip : clips) clip.embedding = hash_embed(text_for_embedding(clip), dim, seed);
  return Corpus(std::move(clips));
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace avtime
