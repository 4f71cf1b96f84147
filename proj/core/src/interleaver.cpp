// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/interleaver.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "avtime/error.hpp"
#include "avtime/matrix_io.hpp"
#include "jsonl.hpp"

namespace avtime {
namespace {

using detail::json;

// Absorbs binary rounding in (1 - rho) / rho, e.g. 0.9 / 0.1 < 9.
constexpr double kOmegaEpsilon = 1e-9;

}  // namespace

std::string_view to_string(Modality modality) {
  return modality == Modality::audio ? "audio" : "video";
}

Modality parse_modality(std::string_view text) {
  if (text == "video") return Modality::video;
  if (text == "audio") return Modality::audio;
  throw ValidationError("unknown modality \"" + std::string(text) + "\"");
}

TokenSequence::TokenSequence(Modality modality, std::size_t dim, std::vector<double> data)
    : modality_(modality), dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw ValidationError("token sequence dim must be positive");
  if (data_.size() % dim_ != 0) {
    throw ValidationError("token data size " + std::to_string(data_.size()) +
                          " is not a multiple of dim " + std::to_string(dim_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw ValidationError("token sequence contains a non-finite value");
  }
}

TokenSequence resample(const TokenSequence& seq, std::size_t target_len) {
  if (target_len < 1) throw ValidationError("resample: target length must be at least 1");
  const std::size_t len = seq.length();
  if (len < 1) throw ValidationError("resample: empty input sequence");
  if (target_len == len) return seq;

  const std::size_t dim = seq.dim();
  std::vector<double> out(target_len * dim);
  auto emit = [&](std::size_t j, std::size_t i0, double frac) {
    auto dst = out.begin() + static_cast<std::ptrdiff_t>(j * dim);
    const auto a = seq.row(i0);
    if (frac == 0.0) {
      std::copy(a.begin(), a.end(), dst);
      return;
    }
    const auto b = seq.row(i0 + 1);
    for (std::size_t d = 0; d < dim; ++d) dst[static_cast<std::ptrdiff_t>(d)] = a[d] + frac * (b[d] - a[d]);
  };

  if (len == 1) {
    for (std::size_t j = 0; j < target_len; ++j) emit(j, 0, 0.0);
  } else if (target_len == 1) {
    const std::size_t twice = len - 1;  // center = (len - 1) / 2 in 0-based rows
    emit(0, twice / 2, (twice % 2) ? 0.5 : 0.0);
  } else {
    // Exact rational position (j * (len - 1)) / (target_len - 1), 0-based.
    const std::size_t den = target_len - 1;
    for (std::size_t j = 0; j < target_len; ++j) {
      const std::size_t num = j * (len - 1);
      emit(j, num / den, static_cast<double>(num % den) / static_cast<double>(den));
    }
  }
  return TokenSequence(seq.modality(), dim, std::move(out));
}

SlotPattern slot_pattern(std::size_t T, double rho) {
  if (T < 1) throw ValidationError("slot_pattern: T must be at least 1");
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw ValidationError("slot_pattern: rho must lie in [0, 1]");
  }
  SlotPattern p;
  if (rho == 0.0) {
    p.tags.assign(T, Modality::video);
    p.n_video = T;
    return p;
  }
  const std::size_t omega = static_cast<std::size_t>(std::floor((1.0 - rho) / rho + kOmegaEpsilon));
  p.omega = omega;
  p.tags.resize(T);
  for (std::size_t t = 1; t <= T; ++t) {
    p.tags[t - 1] = (t % (omega + 1) == 0) ? Modality::audio : Modality::video;
  }
  p.n_audio = T / (omega + 1);
  p.n_video = T - p.n_audio;
  return p;
}

std::vector<Modality> InterleavedContext::pattern() const {
  std::vector<Modality> tags;
  tags.reserve(tokens.size());
  for (const auto& tok : tokens) tags.push_back(tok.modality);
  return tags;
}

std::string InterleavedContext::pattern_string() const {
  std::string s;
  s.reserve(tokens.size());
  for (const auto& tok : tokens) s.push_back(tok.modality == Modality::audio ? 'A' : 'V');
  return s;
}

InterleavedContext interleave(const std::optional<TokenSequence>& video,
                              const std::optional<TokenSequence>& audio, std::size_t T,
                              double rho) {
  const SlotPattern pattern = slot_pattern(T, rho);
  if (video && video->modality() != Modality::video) {
    throw ValidationError("interleave: video input is tagged as audio");
  }
  if (audio && audio->modality() != Modality::audio) {
    throw ValidationError("interleave: audio input is tagged as video");
  }
  if (pattern.n_video > 0 && !video) {
    throw ValidationError("interleave: video tokens are required at rho = " + std::to_string(rho));
  }
  if (pattern.n_audio > 0 && !audio) {
    throw ValidationError("interleave: audio tokens are required at rho = " + std::to_string(rho));
  }
  if (pattern.n_video > 0 && pattern.n_audio > 0 && video->dim() != audio->dim()) {
    throw ValidationError("interleave: video dim " + std::to_string(video->dim()) +
                          " differs from audio dim " + std::to_string(audio->dim()));
  }

  std::optional<TokenSequence> v, a;
  if (pattern.n_video > 0) v = resample(*video, pattern.n_video);
  if (pattern.n_audio > 0) a = resample(*audio, pattern.n_audio);

  InterleavedContext ctx;
  ctx.T = T;
  ctx.rho = rho;
  ctx.omega = pattern.omega;
  ctx.n_audio = pattern.n_audio;
  ctx.n_video = pattern.n_video;
  ctx.tokens.reserve(T);
  const std::size_t period = pattern.omega ? *pattern.omega + 1 : 0;
  for (std::size_t t = 1; t <= T; ++t) {
    ContextToken tok;
    tok.modality = pattern.tags[t - 1];
    if (tok.modality == Modality::audio) {
      tok.source_index = t / period;
      const auto row = a->row(tok.source_index - 1);
      tok.vector.assign(row.begin(), row.end());
    } else {
      tok.source_index = period == 0 ? t : t - t / period;
      const auto row = v->row(tok.source_index - 1);
      tok.vector.assign(row.begin(), row.end());
    }
    ctx.tokens.push_back(std::move(tok));
  }
  return ctx;
}

TokenSequence tokens_from_json_text(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ValidationError("malformed token JSON");
  const std::string ctx = "token JSON";
  const auto modality = parse_modality(detail::require<std::string>(doc, "modality", ctx));
  const auto rows = detail::require<std::vector<std::vector<double>>>(doc, "data", ctx);
  std::size_t dim = rows.empty() ? 0 : rows.front().size();
  if (doc.contains("dim")) dim = detail::require<std::size_t>(doc, "dim", ctx);
  std::vector<double> flat;
  flat.reserve(rows.size() * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw ValidationError("token JSON: row " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size()) + " values, dim is " +
                            std::to_string(dim));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return TokenSequence(modality, dim, std::move(flat));
}

std::string tokens_to_json_text(const TokenSequence& seq) {
  json doc = json::object();
  doc["modality"] = to_string(seq.modality());
  doc["dim"] = seq.dim();
  json rows = json::array();
  for (std::size_t i = 0; i < seq.length(); ++i) {
    const auto r = seq.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  doc["data"] = std::move(rows);
  return detail::dump_line(doc);
}

TokenSequence read_tokens_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return tokens_from_json_text(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_tokens_json(const TokenSequence& seq, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << tokens_to_json_text(seq) << '\n';
  detail::finish_write(out, path);
}

TokenSequence read_tokens_raw(const std::filesystem::path& path) {
  RawMatrix m = read_raw_matrix(path);
  json attrs = json::parse(m.attributes_json, nullptr, false);
  if (attrs.is_discarded() || !attrs.contains("modality") || !attrs["modality"].is_string()) {
    throw ValidationError(raw_header_path(path).string() + ": header lacks \"modality\"");
  }
  return TokenSequence(parse_modality(attrs["modality"].get<std::string>()), m.cols,
                       std::move(m.data));
}

void write_tokens_raw(const TokenSequence& seq, const std::filesystem::path& path) {
  RawMatrix m;
  m.rows = seq.length();
  m.cols = seq.dim();
  m.data = seq.data();
  json attrs = json::object();
  attrs["modality"] = to_string(seq.modality());
  m.attributes_json = attrs.dump();
  write_raw_matrix(path, m);
}

std::string context_to_json_text(const InterleavedContext& context) {
  json doc = json::object();
  doc["T"] = context.T;
  doc["rho"] = context.rho;
  doc["omega"] = context.omega ? json(*context.omega) : json(nullptr);
  doc["n_audio"] = context.n_audio;
  doc["n_video"] = context.n_video;
  doc["pattern"] = context.pattern_string();
  json tokens = json::array();
  for (const auto& tok : context.tokens) {
    json t = json::object();
    t["modality"] = to_string(tok.modality);
    t["source_index"] = tok.source_index;
    t["vector"] = tok.vector;
    tokens.push_back(std::move(t));
  }
  doc["tokens"] = std::move(tokens);
  return detail::dump_line(doc);
}

void write_context_json(const InterleavedContext& context, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  out << context_to_json_text(context) << '\n';
  detail::finish_write(out, path);
}

}  // namespace avtime
