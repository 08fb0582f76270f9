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

#include "nvlayer/io/config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvlayer/constants.h"
#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

constexpr int kMaxIncludeDepth = 8;

YAML::Node merge(const YAML::Node& base, const YAML::Node& over) {
  if (!base.IsMap() || !over.IsMap()) return YAML::Clone(over);
  YAML::Node out = YAML::Clone(base);
  for (const auto& kv : over) {
    const std::string k = kv.first.as<std::string>();
    if (out[k] && out[k].IsMap() && kv.second.IsMap()) {
      out[k] = merge(out[k], kv.second);
    } else {
      out[k] = YAML::Clone(kv.second);
    }
  }
  return out;
}

YAML::Node resolve_includes(YAML::Node node, const std::filesystem::path& dir, int depth) {
  if (depth > kMaxIncludeDepth) throw ConfigError("include: nesting deeper than 8 (cycle?)");
  if (!node.IsMap()) throw ConfigError("config root must be a mapping");
  const YAML::Node inc = node["include"];
  if (!inc) return node;
  std::vector<std::string> files;
  if (inc.IsScalar()) {
    files.push_back(inc.as<std::string>());
  } else if (inc.IsSequence()) {
    for (const auto& f : inc) files.push_back(f.as<std::string>());
  } else {
    throw ConfigError("include: expected a path or a list of paths");
  }
  YAML::Node base(YAML::NodeType::Map);
  for (const auto& f : files) {
    const std::filesystem::path p = dir / f;
    YAML::Node sub;
    try {
      sub = YAML::LoadFile(p.string());
    } catch (const YAML::Exception& e) {
      throw ConfigError("include: cannot read '" + p.string() + "': " + e.what());
    }
    base = merge(base, resolve_includes(sub, p.parent_path(), depth + 1));
  }
  YAML::Node own = YAML::Clone(node);
  own.remove("include");
  return merge(base, own);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

const std::vector<std::pair<std::string, double>>& units_for(Dim d) {
  static const std::vector<std::pair<std::string, double>> length = {
      {"nm", 1.0}, {"A", 0.1}, {"pm", 1e-3}, {"um", 1e3}};
  static const std::vector<std::pair<std::string, double>> time = {
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}};
  static const std::vector<std::pair<std::string, double>> freq = {
      {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}, {"rad_s", 1.0 / constants::kTwoPi}};
  static const std::vector<std::pair<std::string, double>> field = {
      {"T", 1.0}, {"mT", 1e-3}, {"G", 1e-4}};
  static const std::vector<std::pair<std::string, double>> angle = {
      {"rad", 1.0}, {"deg", constants::kPi / 180.0}, {"pi", constants::kPi}};
  static const std::vector<std::pair<std::string, double>> variance = {{"ns2", 1.0}, {"us2", 1e6}};
  switch (d) {
    case Dim::kLength: return length;
    case Dim::kTime: return time;
    case Dim::kFrequency: return freq;
    case Dim::kField: return field;
    case Dim::kAngle: return angle;
    case Dim::kVariance: return variance;
  }
  return length;
}

ConfigSection::ConfigSection(YAML::Node node, std::string path)
    : node_(std::move(node)), path_(std::move(path)) {
  if (defined() && !node_.IsMap()) throw ConfigError(path_ + ": expected a mapping");
}

std::string ConfigSection::field(const std::string& name) const {
  return path_.empty() ? name : path_ + "." + name;
}

void ConfigSection::restrict_to(const std::vector<KeySpec>& keys) const {
  if (!defined()) return;
  for (const auto& kv : node_) {
    const std::string k = kv.first.as<std::string>();
    bool ok = false;
    for (const auto& spec : keys) {
      if (!spec.quantity) {
        ok |= k == spec.name;
        continue;
      }
      if (k == spec.name) {
        std::string hint;
        for (const auto& u : units_for(spec.dim)) hint += (hint.empty() ? "" : ", ") + spec.name + "_" + u.first;
        throw ConfigError(field(k) + ": physical quantities need a unit suffix (one of " + hint + ")");
      }
      for (const auto& u : units_for(spec.dim)) ok |= k == spec.name + "_" + u.first;
    }
    if (!ok) throw ConfigError(field(k) + ": unknown field");
  }
}

bool ConfigSection::has(const std::string& name) const { return defined() && node_[name]; }

ConfigSection ConfigSection::child(const std::string& name) const {
  if (!defined()) return ConfigSection(YAML::Node(), field(name));
  return ConfigSection(node_[name], field(name));
}

std::string ConfigSection::string(const std::string& name, std::optional<std::string> def) const {
  if (!has(name)) {
    if (def) return *def;
    throw ConfigError(field(name) + ": required field missing");
  }
  const YAML::Node v = node_[name];
  if (!v.IsScalar()) throw ConfigError(field(name) + ": expected a string");
  return v.as<std::string>();
}

long long ConfigSection::integer(const std::string& name, std::optional<long long> def) const {
  if (!has(name)) {
    if (def) return *def;
    throw ConfigError(field(name) + ": required field missing");
  }
  try {
    return node_[name].as<long long>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field(name) + ": expected an integer");
  }
}

double ConfigSection::number(const std::string& name, std::optional<double> def) const {
  if (!has(name)) {
    if (def) return *def;
    throw ConfigError(field(name) + ": required field missing");
  }
  try {
    return node_[name].as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field(name) + ": expected a number");
  }
}

bool ConfigSection::boolean(const std::string& name, std::optional<bool> def) const {
  if (!has(name)) {
    if (def) return *def;
    throw ConfigError(field(name) + ": required field missing");
  }
  try {
    return node_[name].as<bool>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field(name) + ": expected true or false");
  }
}

std::vector<double> ConfigSection::numbers(const std::string& name) const {
  if (!has(name)) throw ConfigError(field(name) + ": required field missing");
  const YAML::Node v = node_[name];
  if (v.IsScalar()) return {number(name)};
  if (!v.IsSequence()) throw ConfigError(field(name) + ": expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    try {
      out.push_back(v[i].as<double>());
    } catch (const YAML::Exception&) {
      throw ConfigError(field(name) + "[" + std::to_string(i) + "]: expected a number");
    }
  }
  return out;
}

std::optional<std::pair<std::string, double>> ConfigSection::find_quantity(const std::string& name,
                                                                           Dim d) const {
  if (!defined()) return std::nullopt;
  if (node_[name]) throw ConfigError(field(name) + ": physical quantities need a unit suffix");
  std::optional<std::pair<std::string, double>> hit;
  for (const auto& u : units_for(d)) {
    const std::string k = name + "_" + u.first;
    if (!node_[k]) continue;
    if (hit) throw ConfigError(field(name) + ": given in more than one unit");
    hit = std::make_pair(k, u.second);
  }
  return hit;
}

bool ConfigSection::has_quantity(const std::string& name, Dim d) const {
  return find_quantity(name, d).has_value();
}

double ConfigSection::quantity(const std::string& name, Dim d, std::optional<double> def) const {
  const auto hit = find_quantity(name, d);
  if (!hit) {
    if (def) return *def;
    throw ConfigError(field(name) + ": required field missing (with a unit suffix, e.g. " + name +
                      "_" + units_for(d).front().first + ")");
  }
  return number(hit->first) * hit->second;
}

std::vector<double> ConfigSection::quantities(const std::string& name, Dim d) const {
  const auto hit = find_quantity(name, d);
  if (!hit) {
    throw ConfigError(field(name) + ": required field missing (with a unit suffix, e.g. " + name +
                      "_" + units_for(d).front().first + ")");
  }
  std::vector<double> v = numbers(hit->first);
  for (double& x : v) x *= hit->second;
  return v;
}

ConfigSection ExperimentConfig::section(const std::string& name) const {
  return ConfigSection(root[name], name);
}

std::string ExperimentConfig::run_id() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

const std::vector<std::string>& known_protocols() {
  static const std::vector<std::string> p = {"axy_spectrum", "novel", "ramsey", "hahn", "wahuha",
                                             "dtc", "dtc_sweep", "distance_table", "validate"};
  return p;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node raw;
  try {
    raw = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.root = resolve_includes(raw, base_dir, 0);
  const ConfigSection top(cfg.root, "");
  top.restrict_to({plain("protocol"), plain("seed"), plain("threads"), plain("output"),
                   plain("geometry"), plain("hamiltonian"), plain("engine"), plain("axy"),
                   plain("novel"), plain("sequence"), plain("dtc"), plain("dephasing"),
                   plain("distance_table"), plain("validate"), plain("fit")});
  cfg.protocol = top.string("protocol");
  const auto& known = known_protocols();
  if (std::find(known.begin(), known.end(), cfg.protocol) == known.end()) {
    throw ConfigError("protocol: unknown protocol '" + cfg.protocol + "'");
  }
  const long long seed = top.integer("seed", 1);
  if (seed < 0) throw ConfigError("seed: must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const long long threads = top.integer("threads", 0);
  if (threads < 0) throw ConfigError("threads: must be nonnegative");
  cfg.threads = static_cast<std::size_t>(threads);
  const ConfigSection out = top.child("output");
  out.restrict_to({plain("dir"), plain("stem")});
  const std::filesystem::path dir = out.string("dir", "results");
  cfg.output_dir = dir.is_absolute() ? dir : base_dir / dir;
  cfg.output_stem = out.string("stem", cfg.protocol);
  YAML::Emitter em;
  em << cfg.root;
  cfg.canonical = em.c_str();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
  cfg.source = path;
  return cfg;
}

}  // namespace nvlayer
