// Copyright 2026 The nvlayer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace nvlayer {

/// Columnar numeric table. Cells are stored as text so integer and label columns survive.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
  void add_row(std::vector<std::string> cells);
  std::size_t column_index(const std::string& name) const;  // throws QueryError
  std::vector<double> column(const std::string& name) const;
};

/// Shortest text that round-trips the double exactly.
std::string format_number(double x);

inline constexpr const char* kCsvHeader = "# nvlayer-csv v1";
inline constexpr const char* kManifestFormat = "nvlayer-manifest v1";
inline constexpr const char* kReportFormat = "nvlayer-report v1";

/// Header line, then the column names with a trailing run_id column, then one line per row.
std::string to_csv(const Table& table, const std::string& run_id);
/// Parses what to_csv writes. The run_id column is kept.
Table parse_csv(const std::string& text);

/// Writes via a sibling temporary file and rename; readers never see partial output.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const Table& table, const std::string& run_id);
/// Pretty-printed with a "format" key added.
void write_report(const std::filesystem::path& path, nlohmann::json report);

struct RunManifest {
  std::string run_id;
  std::string protocol;
  std::string config_path;
  std::string config_echo;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::vector<std::string> outputs;
  nlohmann::json cache = nlohmann::json::array();
  double wall_time_s = 0.0;
  std::string timestamp;  // UTC, ISO 8601
};

nlohmann::json manifest_json(const RunManifest& m);
std::string utc_timestamp();
std::string code_version();

}  // namespace nvlayer
