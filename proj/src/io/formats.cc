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

#include "nvlayer/io/formats.h"

#include <charconv>
#include <cmath>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nvlayer/errors.h"
#include "nvlayer/pauli/table_cache.h"

namespace nvlayer {

void Table::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(std::move(cells));
}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != names.size()) throw QueryError("table row width does not match header");
  rows.push_back(std::move(cells));
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw QueryError("no column '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(std::stod(r[c]));
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table, const std::string& run_id) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& n : table.names) os << n << ',';
  os << "run_id\n";
  for (const auto& r : table.rows) {
    for (const auto& c : r) os << c << ',';
    os << run_id << '\n';
  }
  return os.str();
}

Table parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw ConfigError("not an nvlayer CSV (missing '" + std::string(kCsvHeader) + "' header)");
  }
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    return out;
  };
  Table t;
  if (!std::getline(is, line)) throw ConfigError("CSV has no column line");
  t.names = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.add_row(split(line));
  }
  return t;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write '" + tmp.string() + "'");
    os << content;
    os.flush();
    if (!os) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot rename onto '" + path.string() + "': " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_csv(const std::filesystem::path& path, const Table& table, const std::string& run_id) {
  atomic_write(path, to_csv(table, run_id));
}

void write_report(const std::filesystem::path& path, nlohmann::json report) {
  report["format"] = kReportFormat;
  atomic_write(path, report.dump(2) + "\n");
}

nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["format"] = kManifestFormat;
  j["run_id"] = m.run_id;
  j["protocol"] = m.protocol;
  j["config_path"] = m.config_path;
  j["config"] = m.config_echo;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["code_version"] = code_version();
  j["table_format"] = table_code_version();
  j["cache"] = m.cache;
  j["outputs"] = m.outputs;
  j["wall_time_s"] = m.wall_time_s;
  j["timestamp"] = m.timestamp;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string code_version() {
#ifdef NVLAYER_VERSION
  return NVLAYER_VERSION;
#else
  return "unknown";
#endif
}

}  // namespace nvlayer
