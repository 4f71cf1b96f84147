// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace avtime::cli {

enum class OutputFormat { json, table };

/// Settings shared by every subcommand. Precedence: built-in defaults, then
/// the --config JSON file, then explicit flags.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t T = 100;
  double rho = 0.25;
  double scale_min = 0.5;
  double scale_max = 2.0;
  double scale_step = 0.1;
  std::size_t m_min = 3;
  std::size_t m_max = 20;
  std::size_t videos_per_cluster = 1;
  /// Unset means round(n / 1.3).
  std::optional<std::size_t> k;
  std::size_t max_iters = 100;
  std::size_t restarts = 8;
  std::size_t embed_dim = 256;
  OutputFormat format = OutputFormat::json;
};

/// Overrides fields from a JSON object. Unknown keys and wrongly typed values
/// raise ValidationError.
void apply_config_json(RunConfig& config, std::string_view json_text);

/// Reads and applies a config file; IoError if it cannot be read.
void apply_config_file(RunConfig& config, const std::string& path);

}  // namespace avtime::cli
