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

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nvlayer/errors.h"
#include "nvlayer/io/config.h"
#include "nvlayer/io/formats.h"
#include "nvlayer/io/runner.h"
#include "nvlayer/pauli/kernels.h"

namespace {

int guarded(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "nvlayer: " << nvlayer::describe_error(e) << "\n";
    return nvlayer::exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nvlayer: NV-center and nuclear spin-layer dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nvlayer::code_version());

  std::string run_cfg;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", run_cfg, "Config file (YAML)")->required();
  run->add_flag("-q,--quiet", quiet, "Do not print the summary");

  std::string cache_cmd;
  std::string cache_cfg;
  auto* cache = app.add_subcommand("cache", "Manage the action-table cache");
  cache->add_option("command", cache_cmd, "build, list, or purge")
      ->required()
      ->check(CLI::IsMember({"build", "list", "purge"}));
  cache->add_option("config", cache_cfg, "Config naming the geometry and cache directory")->required();

  auto* info = app.add_subcommand("info", "Print build and kernel information");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*run) {
    return guarded([&] {
      const nvlayer::ExperimentConfig cfg = nvlayer::load_config(run_cfg);
      const nvlayer::RunResult r = nvlayer::run_experiment(cfg);
      if (!quiet) {
        nlohmann::json out{{"run_id", cfg.run_id()}, {"protocol", cfg.protocol}, {"summary", r.summary}};
        nlohmann::json files = nlohmann::json::array();
        for (const auto& p : r.outputs) files.push_back(p.string());
        out["outputs"] = files;
        std::cout << out.dump(2) << "\n";
      }
    });
  }
  if (*cache) {
    return guarded([&] {
      const nvlayer::ExperimentConfig cfg = nvlayer::load_config(cache_cfg);
      nlohmann::json j;
      if (cache_cmd == "build") {
        j = nvlayer::cache_build(cfg);
      } else if (cache_cmd == "list") {
        j = nvlayer::cache_list(cfg);
      } else {
        j = nvlayer::cache_purge(cfg);
      }
      std::cout << j.dump(2) << "\n";
    });
  }
  if (*info) {
    using nvlayer::KernelChoice;
    std::cout << "nvlayer " << nvlayer::code_version() << "\n";
    for (KernelChoice k : {KernelChoice::kScalar, KernelChoice::kAvx2, KernelChoice::kNeon}) {
      std::cout << "kernel " << nvlayer::kernel_name(k)
                << (nvlayer::kernel_available(k) ? " available" : " unavailable") << "\n";
    }
    std::cout << "auto -> " << nvlayer::kernel_name(nvlayer::resolve_kernel(KernelChoice::kAuto)) << "\n";
  }
  return 0;
}
