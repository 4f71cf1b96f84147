// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace avtime {

/// Row-major float32 matrix stored as raw little-endian bytes in `path`, with a
/// JSON header in `path + ".json"`:
///   {"rows": int, "cols": int, "dtype": "float32", "byte_order": "little", ...}
/// Extra header keys are preserved in `attributes_json` (a JSON object text).
struct RawMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::string attributes_json = "{}";
};

std::filesystem::path raw_header_path(const std::filesystem::path& data_path);

RawMatrix read_raw_matrix(const std::filesystem::path& data_path);

/// Values are narrowed to float32 on write.
void write_raw_matrix(const std::filesystem::path& data_path, const RawMatrix& matrix);

}  // namespace avtime
