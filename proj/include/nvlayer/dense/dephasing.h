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

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nvlayer/dense/dense_ops.h"

namespace nvlayer {

class ThreadPool;

enum class SamplingLaw { kNormal, kUniform };

std::string sampling_law_name(SamplingLaw law);
SamplingLaw parse_sampling_law(const std::string& name);

/// Markovian dephasing by random static detunings, redrawn for every free-evolution segment.
struct DephasingModel {
  double T2_s = std::numeric_limits<double>::infinity();
  // Normal: N(0, sqrt(2)/T2). Uniform: zero mean with the same standard deviation.
  SamplingLaw law = SamplingLaw::kNormal;
  std::size_t n_samples = 2000;
  std::uint64_t seed = 1;
  // One shared detuning for every site instead of independent draws.
  bool common_mode = false;
  // Record the draws of sample path 0 (debug column).
  bool record_draws = false;

  bool active() const { return T2_s > 0.0 && std::isfinite(T2_s); }
  /// sqrt(2) / T2 in rad/s.
  double scale() const { return active() ? std::sqrt(2.0) / T2_s : 0.0; }
  /// Closed-form single-spin coherence E[cos(delta t)] for the chosen law.
  double envelope(double t) const;
};

/// Independent RNG stream of one sample path, derived from (seed, path index).
class DetuningStream {
 public:
  DetuningStream(const DephasingModel& model, std::uint64_t path);
  /// Fills `out` with one draw per site (all equal in common mode).
  void draw(std::vector<double>& out, std::size_t n_sites);

 private:
  SamplingLaw law_;
  double sigma_;
  bool common_;
  std::mt19937_64 rng_;
};

/// rho <- (1/S) sum_s U_s rho U_s^dagger with U_s = exp(-i (H + sum_i delta_{s,i} s_z^i) t), one
/// fresh draw per stream and listed site. Reduction order is fixed, so results do not depend
/// on the pool size. When `draws_path0` is set it receives the draws of stream 0.
void dephased_free_evolution(CMat& rho, const HamiltonianTerms& h, std::size_t n_sites,
                             const std::vector<std::uint32_t>& sites, double t,
                             std::vector<DetuningStream>& streams, ThreadPool* pool = nullptr,
                             std::vector<double>* draws_path0 = nullptr);

}  // namespace nvlayer
