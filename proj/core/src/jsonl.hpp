// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

// Internal JSON Lines helpers shared by the readers and writers.

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "avtime/error.hpp"

namespace avtime::detail {

using json = nlohmann::json;

inline std::string where(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

/// Calls fn(object, line_no) for every non-blank line. Lines that are not JSON
/// objects raise ValidationError with the line number.
template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw ValidationError(where(path, line_no) + ": malformed JSON record");
    }
    fn(record, line_no);
  }
  if (in.bad()) throw IoError("failed reading " + path.string());
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

inline void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename T>
T require(const json& record, std::string_view key, const std::string& context) {
  const auto it = record.find(key);
  if (it == record.end()) {
    throw ValidationError(context + ": missing field \"" + std::string(key) + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(context + ": field \"" + std::string(key) + "\" has the wrong type");
  }
}

inline double require_number(const json& record, std::string_view key,
                             const std::string& context) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_number()) {
    throw ValidationError(context + ": field \"" + std::string(key) +
                          "\" must be a number");
  }
  return it->get<double>();
}

// Keeps JSON output free of lossy formatting; nlohmann prints doubles in the
// shortest form that round-trips.
inline std::string dump_line(const json& record) {
  return record.dump(-1, ' ', false, json::error_handler_t::strict);
}

}  // namespace avtime::detail
