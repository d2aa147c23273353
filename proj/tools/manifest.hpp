/*
 * Copyright 2026 The rapls Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace rapls::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

struct InputRecord {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

/// Provenance of one successful run. Everything except `wall_seconds`
/// is a pure function of the inputs and flags.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<InputRecord> inputs;
  std::vector<std::string> outputs;
  nlohmann::json results = nlohmann::json::object();
  double wall_seconds = 0.0;

  /// Reads a file, recording its checksum; returns the bytes.
  std::string read_input(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace rapls::cli
