// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "avtime/error.hpp"

namespace avtime {
namespace {

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

}  // namespace

std::filesystem::path raw_header_path(const std::filesystem::path& data_path) {
  auto header = data_path;
  header += ".json";
  return header;
}

RawMatrix read_raw_matrix(const std::filesystem::path& data_path) {
  const auto header_path = raw_header_path(data_path);
  std::ifstream header_in(header_path);
  if (!header_in) throw IoError("cannot open matrix header " + header_path.string());
  nlohmann::json header = nlohmann::json::parse(header_in, nullptr, false);
  if (header.is_discarded() || !header.is_object()) {
    throw ValidationError("malformed matrix header " + header_path.string());
  }
  if (header.value("dtype", "float32") != "float32" ||
      header.value("byte_order", "little") != "little") {
    throw ValidationError("matrix header " + header_path.string() +
                          ": only little-endian float32 is supported");
  }
  if (!header.contains("rows") || !header.contains("cols") ||
      !header["rows"].is_number_unsigned() || !header["cols"].is_number_unsigned()) {
    throw ValidationError("matrix header " + header_path.string() + " lacks rows/cols");
  }

  RawMatrix m;
  m.rows = header["rows"].get<std::size_t>();
  m.cols = header["cols"].get<std::size_t>();
  for (const char* key : {"rows", "cols", "dtype", "byte_order"}) header.erase(key);
  m.attributes_json = header.dump();

  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw IoError("cannot open matrix data " + data_path.string());
  std::vector<char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const std::size_t expected = m.rows * m.cols * sizeof(std::uint32_t);
  if (bytes.size() != expected) {
    throw ValidationError("matrix data " + data_path.string() + " has " +
                          std::to_string(bytes.size()) + " bytes, header implies " +
                          std::to_string(expected));
  }
  m.data.resize(m.rows * m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    std::uint32_t word;
    std::memcpy(&word, bytes.data() + i * sizeof(word), sizeof(word));
    m.data[i] = static_cast<double>(std::bit_cast<float>(to_little(word)));
  }
  return m;
}

void write_raw_matrix(const std::filesystem::path& data_path, const RawMatrix& matrix) {
  if (matrix.data.size() != matrix.rows * matrix.cols) {
    throw ValidationError("raw matrix size does not match rows x cols");
  }
  nlohmann::json header = nlohmann::json::parse(matrix.attributes_json, nullptr, false);
  if (header.is_discarded() || !header.is_object()) header = nlohmann::json::object();
  header["rows"] = matrix.rows;
  header["cols"] = matrix.cols;
  header["dtype"] = "float32";
  header["byte_order"] = "little";

  const auto header_path = raw_header_path(data_path);
  std::ofstream header_out(header_path);
  if (!header_out) throw IoError("cannot write matrix header " + header_path.string());
  header_out << header.dump() << '\n';

  std::ofstream out(data_path, std::ios::binary);
  if (!out) throw IoError("cannot write matrix data " + data_path.string());
  for (double v : matrix.data) {
    const std::uint32_t word = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    out.write(reinterpret_cast<const char*>(&word), sizeof(word));
  }
  if (!out) throw IoError("failed writing " + data_path.string());
}

}  // namespace avtime
