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
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

namespace nvlayer {

/// Physical dimensions a config quantity may carry. Values are returned in internal units:
/// nm, s, Hz (cyclic), T, rad, ns^2.
enum class Dim { kLength, kTime, kFrequency, kField, kAngle, kVariance };

struct KeySpec {
  std::string name;
  // Quantities must be written as name_<unit>; plain keys are used as written.
  bool quantity = false;
  Dim dim = Dim::kLength;
};
inline KeySpec plain(std::string name) { return {std::move(name), false, Dim::kLength}; }
inline KeySpec quantity(std::string name, Dim d) { return {std::move(name), true, d}; }

/// Units accepted for a dimension, with the factor to internal units.
const std::vector<std::pair<std::string, double>>& units_for(Dim d);

/// View of one mapping in the config tree. Every error names the full field path.
class ConfigSection {
 public:
  ConfigSection() = default;
  ConfigSection(YAML::Node node, std::string path);

  const std::string& path() const { return path_; }
  bool defined() const { return node_.IsDefined() && !node_.IsNull(); }
  const YAML::Node& node() const { return node_; }

  /// Throws ConfigError for keys outside `keys` and for quantities lacking a unit suffix.
  void restrict_to(const std::vector<KeySpec>& keys) const;

  bool has(const std::string& name) const;
  ConfigSection child(const std::string& name) const;

  std::string string(const std::string& name, std::optional<std::string> def = std::nullopt) const;
  long long integer(const std::string& name, std::optional<long long> def = std::nullopt) const;
  double number(const std::string& name, std::optional<double> def = std::nullopt) const;
  bool boolean(const std::string& name, std::optional<bool> def = std::nullopt) const;
  std::vector<double> numbers(const std::string& name) const;

  /// Looks up name_<unit> and converts. At most one unit variant may be present.
  bool has_quantity(const std::string& name, Dim d) const;
  double quantity(const std::string& name, Dim d, std::optional<double> def = std::nullopt) const;
  std::vector<double> quantities(const std::string& name, Dim d) const;

 private:
  std::string field(const std::string& name) const;
  std::optional<std::pair<std::string, double>> find_quantity(const std::string& name, Dim d) const;

  YAML::Node node_;
  std::string path_;
};

struct ExperimentConfig {
  std::filesystem::path source;
  std::string protocol;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: NVLAYER_THREADS or hardware concurrency
  std::filesystem::path output_dir;
  std::string output_stem;
  YAML::Node root;          // includes resolved
  std::string canonical;    // YAML dump of root, used for echo and run ids

  ConfigSection section(const std::string& name) const;
  /// 16 hex digits derived from the canonical text; stable across reruns.
  std::string run_id() const;
};

/// Reads a config file, resolving `include:` entries (paths relative to the including file;
/// the including file's keys win). Throws ConfigError with a field path on any problem.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");

const std::vector<std::string>& known_protocols();

}  // namespace nvlayer
