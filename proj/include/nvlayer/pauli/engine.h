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

#include <array>
#include <cstdint>
#include <vector>

#include "nvlayer/geometry/layout.h"
#include "nvlayer/pauli/action_table.h"
#include "nvlayer/pauli/basis.h"

namespace nvlayer {

class ThreadPool;

/// Pauli expectation values c_P = <P> over a truncated basis, for `lanes` interleaved runs.
/// Lane b evolves under alpha[b] * H (the rescaling mode); alpha defaults to 1.
class TruncatedState {
 public:
  TruncatedState() = default;
  TruncatedState(std::size_t dim, std::size_t lanes = 1);

  std::size_t dim() const { return dim_; }
  std::size_t lanes() const { return lanes_; }

  double& at(std::size_t index, std::size_t lane = 0) { return c_[index * lanes_ + lane]; }
  double at(std::size_t index, std::size_t lane = 0) const { return c_[index * lanes_ + lane]; }
  std::vector<double>& data() { return c_; }
  const std::vector<double>& data() const { return c_; }

  const std::vector<double>& alpha() const { return alpha_; }
  void set_alpha(std::vector<double> alpha);

  /// Extracts one lane as a standalone single-lane state.
  TruncatedState lane(std::size_t b) const;

 private:
  friend class PauliEngine;
  std::size_t dim_ = 0;
  std::size_t lanes_ = 1;
  std::vector<double> c_;
  std::vector<double> alpha_;
  std::vector<double> work_a_, work_b_;
};

struct EngineOptions {
  int taylor_order = 16;
  // Largest admissible dt * lambda * max|alpha| per step.
  double step_bound = 1.0;
  KernelChoice kernel = KernelChoice::kAuto;
  ThreadPool* pool = nullptr;
};

/// Product-state initializer: site k has Bloch vector bloch[k] (|v| <= 1).
TruncatedState product_state(const TruncatedBasis& basis, const std::vector<Vec3>& bloch,
                             std::size_t lanes = 1);

/// Truncated Pauli-string propagator over one action table.
class PauliEngine {
 public:
  PauliEngine(const TruncatedBasis& basis, const ActionTable& table, EngineOptions opt = {});

  const TruncatedBasis& basis() const { return *basis_; }
  const ActionTable& table() const { return *table_; }
  const EngineOptions& options() const { return opt_; }

  /// One Taylor step of order K. Throws StepSizeError above the stability bound.
  void step(TruncatedState& s, double dt) const;
  /// Evolves by t using the smallest uniform step count honoring the bound.
  void evolve(TruncatedState& s, double t) const;
  std::size_t steps_for(double t, double max_alpha) const;

  /// Conjugates by the rotation exp(-i angle n.sigma/2) on each listed site. Exact.
  void apply_pulse(TruncatedState& s, const std::vector<std::uint32_t>& sites, const Vec3& axis,
                   double angle) const;
  /// NV (site 0) re-initialized to m_s = 0 with the nuclear marginal kept.
  void laser_reset(TruncatedState& s) const;

  double expectation(const TruncatedState& s, const PauliString& p, std::size_t lane = 0) const;
  double mean_z(const TruncatedState& s, const std::vector<std::uint32_t>& sites,
                std::size_t lane = 0) const;

  /// Throws StepSizeError when a single-site Bloch component has left [-1-1e-6, 1+1e-6].
  void check_physical(const TruncatedState& s) const;

 private:
  const TruncatedBasis* basis_;
  const ActionTable* table_;
  EngineOptions opt_;
  // triplets_[site] holds (X, Y, Z) indices of strings that agree away from `site`.
  std::vector<std::vector<std::array<std::uint32_t, 3>>> triplets_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> reset_copy_;  // (Z_NV Q, Q)
  std::vector<std::uint32_t> reset_zero_;
};

}  // namespace nvlayer
