// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include "avtime/run_config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "avtime/error.hpp"

namespace avtime::cli {

void apply_config_json(RunConfig& config, std::string_view json_text) {
  using nlohmann::json;
  const json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ValidationError("config must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    auto uint = [&]() -> std::size_t {
      if (!value.is_number_unsigned()) {
        throw ValidationError("config key \"" + key + "\" must be a non-negative integer");
      }
      return value.get<std::size_t>();
    };
    auto real = [&]() -> double {
      if (!value.is_number()) throw ValidationError("config key \"" + key + "\" must be a number");
      return value.get<double>();
    };
    if (key == "seed") config.seed = value.is_number_unsigned() ? value.get<std::uint64_t>() : uint();
    else if (key == "T") config.T = uint();
    else if (key == "rho") config.rho = real();
    else if (key == "scale_min") config.scale_min = real();
    else if (key == "scale_max") config.scale_max = real();
    else if (key == "scale_step") config.scale_step = real();
    else if (key == "m_min") config.m_min = uint();
    else if (key == "m_max") config.m_max = uint();
    else if (key == "videos_per_cluster") config.videos_per_cluster = uint();
    else if (key == "k") config.k = uint();
    else if (key == "max_iters") config.max_iters = uint();
    else if (key == "restarts") config.restarts = uint();
    else if (key == "embed_dim") config.embed_dim = uint();
    else if (key == "format") {
      if (value == "json") config.format = OutputFormat::json;
      else if (value == "table") config.format = OutputFormat::table;
      else throw ValidationError("config key \"format\" must be \"json\" or \"table\"");
    } else {
      throw ValidationError("unknown config key \"" + key + "\"");
    }
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_json(config, buf.str());
}

}  // namespace avtime::cli
