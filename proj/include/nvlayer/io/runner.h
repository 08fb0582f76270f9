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

#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nvlayer/dense/dephasing.h"
#include "nvlayer/io/config.h"
#include "nvlayer/io/formats.h"
#include "nvlayer/sequences/protocols.h"

namespace nvlayer {

/// geometry: kind (grid, chain, single, table) plus the kind's fields, field strength, and the
/// optional uniform_j_<unit> and strong_nucleus overrides.
SpinSystem system_from_config(const ExperimentConfig& cfg);
HamiltonianOptions hamiltonian_from_config(const ConfigSection& s);
std::optional<DephasingModel> dephasing_from_config(const ConfigSection& s, std::uint64_t seed);

/// Reads either `<name>_<unit>: [...]` or `<name>_grid: {start_<unit>, stop_<unit>, count}`.
std::vector<double> grid_from_config(const ConfigSection& s, const std::string& name, Dim d);

struct EngineSettings {
  EngineKind kind = EngineKind::kTruncated;
  KernelChoice kernel = KernelChoice::kAuto;
  TruncationRule truncation;
  int taylor_order = EngineOptions{}.taylor_order;
  double step_bound = EngineOptions{}.step_bound;
  std::size_t lane_batch = 32;
  std::size_t max_dense_spins = kDefaultMaxDenseSpins;
  bool use_cache = false;
  std::filesystem::path cache_dir;
};
/// `engine` may be a bare name or a mapping with `kind`.
EngineSettings engine_from_config(const ExperimentConfig& cfg, EngineKind default_kind);

struct RunResult {
  std::vector<std::filesystem::path> outputs;  // data files, then the manifest last
  std::filesystem::path manifest;
  nlohmann::json summary;
};

/// Executes the configured protocol, writes its outputs and manifest atomically.
RunResult run_experiment(const ExperimentConfig& cfg);

/// 0 ok, 2 configuration, 3 capacity, 4 fit failure, 1 anything else.
int exit_code_for(const std::exception& e);
/// One-line diagnostic including sizing advice for capacity errors.
std::string describe_error(const std::exception& e);

/// Action-table cache lifecycle for the configured geometry's AXY Hamiltonian.
nlohmann::json cache_build(const ExperimentConfig& cfg);
nlohmann::json cache_list(const ExperimentConfig& cfg);
nlohmann::json cache_purge(const ExperimentConfig& cfg);

}  // namespace nvlayer
