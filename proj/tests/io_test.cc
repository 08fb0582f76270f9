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
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "nvlayer/errors.h"
#include "nvlayer/io/config.h"
#include "nvlayer/io/formats.h"
#include "nvlayer/io/runner.h"

using namespace nvlayer;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nvlayer_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string single_spin_hahn(const fs::path& out) {
  return "protocol: hahn\n"
         "seed: 4\n"
         "geometry: {kind: single, position_nm: [0.0, 0.0, 1.0], field_T: 0.06}\n"
         "sequence:\n"
         "  detunings_kHz: [2.0]\n"
         "  times_grid: {start_us: 0, stop_us: 100, count: 5}\n"
         "output: {dir: " + out.string() + ", stem: h}\n";
}

}  // namespace

TEST(config, unit_suffixes_convert) {
  const ExperimentConfig c = parse_config(
      "protocol: ramsey\n"
      "geometry: {kind: chain, n: 2, spacing_A: 2.6, distance_nm: 1, field_G: 600}\n");
  const ConfigSection g = c.section("geometry");
  EXPECT_NEAR(g.quantity("spacing", Dim::kLength), 0.26, 1e-15);
  EXPECT_NEAR(g.quantity("field", Dim::kField), 0.06, 1e-15);
  EXPECT_NEAR(g.quantity("missing", Dim::kLength, 3.0), 3.0, 0.0);
  const ExperimentConfig d = parse_config("protocol: dtc\ndtc: {theta_pi: 1.03, tau_us: 50, rabi_kHz: 37.14, x_deg: 90}\n");
  const ConfigSection s = d.section("dtc");
  EXPECT_NEAR(s.quantity("theta", Dim::kAngle), 1.03 * constants::kPi, 1e-15);
  EXPECT_NEAR(s.quantity("tau", Dim::kTime), 50e-6, 1e-20);
  EXPECT_NEAR(s.quantity("rabi", Dim::kFrequency), 37.14e3, 1e-9);
  EXPECT_NEAR(s.quantity("x", Dim::kAngle), 0.5 * constants::kPi, 1e-15);
  EXPECT_FALSE(units_for(Dim::kVariance).empty());
}

TEST(config, rejects_unsuffixed_and_unknown_keys) {
  const ExperimentConfig c = parse_config("protocol: dtc\ndtc: {tau: 50, n_cycles: 4}\n");
  const ConfigSection s = c.section("dtc");
  EXPECT_THROW(s.restrict_to({quantity("tau", Dim::kTime), plain("n_cycles")}), ConfigError);
  EXPECT_THROW(s.restrict_to({plain("n_cycles")}), ConfigError);
  const ExperimentConfig two = parse_config("protocol: dtc\ndtc: {tau_us: 50, tau_ms: 1}\n");
  EXPECT_THROW(two.section("dtc").quantity("tau", Dim::kTime), ConfigError);
  EXPECT_THROW(parse_config("protocol: dtc\nbogus: 1\n"), ConfigError);
  EXPECT_THROW(parse_config("protocol: teleport\n"), ConfigError);
  EXPECT_THROW(parse_config("protocol: [\n"), std::exception);
}

TEST(config, include_merges_and_overrides) {
  const fs::path d = fresh_dir("include");
  write(d / "base.yaml", "geometry: {kind: chain, n: 3, spacing_nm: 0.2, distance_nm: 1, field_T: 0.05}\nseed: 9\n");
  write(d / "top.yaml", "include: base.yaml\nprotocol: ramsey\ngeometry: {n: 5}\n");
  const ExperimentConfig c = load_config(d / "top.yaml");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.section("geometry").integer("n"), 5);
  EXPECT_NEAR(c.section("geometry").quantity("spacing", Dim::kLength), 0.2, 1e-15);
  EXPECT_EQ(c.output_stem, "ramsey");
  EXPECT_EQ(c.output_dir, d / "results");
  write(d / "loop.yaml", "include: loop.yaml\nprotocol: ramsey\n");
  EXPECT_THROW(load_config(d / "loop.yaml"), ConfigError);
  fs::remove_all(d);
}

TEST(config, run_id_is_stable) {
  const std::string text = "protocol: ramsey\nseed: 3\n";
  const auto a = parse_config(text), b = parse_config(text), c = parse_config("protocol: ramsey\nseed: 4\n");
  EXPECT_EQ(a.run_id(), b.run_id());
  EXPECT_EQ(a.run_id().size(), 16u);
  EXPECT_NE(a.run_id(), c.run_id());
}

TEST(formats, csv_round_trip_is_exact) {
  Table t;
  t.names = {"x", "y"};
  t.add_row(std::vector<double>{0.1, 1.0 / 3.0});
  t.add_row(std::vector<double>{-2.5e-300, 6.02214076e23});
  const std::string text = to_csv(t, "abcd");
  EXPECT_EQ(text.rfind(kCsvHeader, 0), 0u);
  const Table back = parse_csv(text);
  EXPECT_EQ(back.column("y"), t.column("y"));
  EXPECT_EQ(back.column("x")[1], -2.5e-300);
  EXPECT_EQ(back.rows.size(), 2u);
  EXPECT_THROW(t.column_index("z"), QueryError);
  EXPECT_EQ(format_number(0.1), "0.1");
}

TEST(formats, atomic_write_and_manifest) {
  const fs::path d = fresh_dir("formats");
  atomic_write(d / "a.txt", "hello");
  EXPECT_EQ(read_file(d / "a.txt"), "hello");
  EXPECT_FALSE(fs::exists(d / "a.txt.tmp"));
  RunManifest m;
  m.run_id = "00ff";
  m.protocol = "hahn";
  const auto j = manifest_json(m);
  EXPECT_EQ(j["format"], kManifestFormat);
  for (const char* k : {"run_id", "protocol", "config", "seed", "threads", "code_version", "outputs", "timestamp"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  fs::remove_all(d);
}

TEST(runner, exit_codes) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
  EXPECT_EQ(exit_code_for(GeometryError("x")), 2);
  EXPECT_EQ(exit_code_for(CapacityError("x", 5)), 3);
  EXPECT_EQ(exit_code_for(FitError("x", 1.0)), 4);
  EXPECT_EQ(exit_code_for(DomainError("x")), 1);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
  EXPECT_NE(describe_error(CapacityError("too big", 1 << 20)).find("too big"), std::string::npos);
}

TEST(runner, rerun_is_deterministic) {
  const fs::path d = fresh_dir("rerun");
  const ExperimentConfig c = parse_config(single_spin_hahn(d));
  const RunResult a = run_experiment(c);
  const std::string csv_a = read_file(d / "h.csv");
  const RunResult b = run_experiment(c);
  EXPECT_EQ(read_file(d / "h.csv"), csv_a);
  EXPECT_EQ(a.outputs.back(), a.manifest);
  const Table t = parse_csv(csv_a);
  EXPECT_EQ(t.rows.size(), 5u);
  const auto m = nlohmann::json::parse(read_file(a.manifest));
  EXPECT_EQ(m["run_id"], c.run_id());
  EXPECT_EQ(m["protocol"], "hahn");
  fs::remove_all(d);
}

TEST(runner, capacity_error_for_oversized_dense_run) {
  const fs::path d = fresh_dir("capacity");
  const ExperimentConfig c = parse_config(
      "protocol: ramsey\n"
      "geometry: {kind: chain, n: 14, spacing_nm: 0.3, distance_nm: 1, field_T: 0.06}\n"
      "sequence: {times_us: [0, 10]}\n"
      "output: {dir: " + d.string() + "}\n");
  try {
    run_experiment(c);
    FAIL() << "expected CapacityError";
  } catch (const std::exception& e) {
    EXPECT_EQ(exit_code_for(e), 3);
  }
  fs::remove_all(d);
}

TEST(runner, cache_build_list_purge) {
  const fs::path d = fresh_dir("cache");
  const ExperimentConfig c = parse_config(
      "protocol: axy_spectrum\n"
      "geometry: {kind: chain, n: 3, spacing_nm: 0.26, distance_nm: 1, field_T: 0.06}\n"
      "engine: {kind: truncated, cache: true, cache_dir: " + (d / "tables").string() + "}\n"
      "axy: {n_reps: 1, frequencies_kHz: [640]}\n"
      "output: {dir: " + d.string() + "}\n");
  const auto built = cache_build(c);
  EXPECT_FALSE(built.empty());
  const auto listed = cache_list(c);
  EXPECT_NE(listed.dump().find("\"valid\":true"), std::string::npos) << listed.dump();
  const RunResult r = run_experiment(c);
  const auto m = nlohmann::json::parse(read_file(r.manifest));
  EXPECT_FALSE(m["cache"].empty());
  cache_purge(c);
  EXPECT_EQ(cache_list(c).dump().find("\"valid\":true"), std::string::npos);
  fs::remove_all(d);
}
