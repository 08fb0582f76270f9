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

#include <cstdint>

#include "nvlayer/geometry/couplings.h"
#include "nvlayer/geometry/layout.h"
#include "nvlayer/hamiltonian/terms.h"

namespace nvlayer {

enum class DipolarMode { kSecularFlipFlop, kFull };

struct HamiltonianOptions {
  DipolarMode dipolar_mode = DipolarMode::kSecularFlipFlop;
  // Pair cutoff in nm. Negative selects the default: unlimited for up to 25 spins,
  // otherwise 3x the smallest nuclear spacing.
  double dipolar_cutoff_nm = -1.0;
  bool include_dipolar = true;
  bool include_zeeman = true;
  bool include_hyperfine = true;
};

/// Resolves the default cutoff for a layout (infinity when unlimited).
double resolve_dipolar_cutoff(const SpinLayout& layout, const HamiltonianOptions& opt);

/// Nuclear pair terms on sites 1..n. Secular mode emits J(ZZ - XX/2 - YY/2);
/// full mode emits the complete point-dipole tensor in the field frame.
HamiltonianTerms build_nuclear_dipolar(const SpinLayout& layout, const CouplingSet& couplings,
                                       DipolarMode mode, double cutoff_nm);

/// Lab-frame secular system: nuclear Zeeman, S_z (A . I) with S_z = s_z - 1/2 on the NV
/// two-level subspace, and nuclear dipolar terms.
HamiltonianTerms build_secular_hamiltonian(const SpinLayout& layout, const CouplingSet& couplings,
                                           const HamiltonianOptions& opt = {});

/// Spin-lock drive direction on the NV: Omega S_y (default) or Omega S_x.
enum class DriveAxis { kY, kX };

/// Secular Hamiltonian plus the spin-lock drive on the NV.
HamiltonianTerms build_novel_hamiltonian(const SpinLayout& layout, const CouplingSet& couplings,
                                         double omega, const HamiltonianOptions& opt = {},
                                         DriveAxis drive = DriveAxis::kY);

/// Nuclear rotating frame with the NV parked in m_s = 0: only nuclear dipolar terms remain.
/// Sites are renumbered 0..n-1 (no NV site).
HamiltonianTerms build_nuclear_frame_hamiltonian(const SpinLayout& layout,
                                                 const CouplingSet& couplings,
                                                 const HamiltonianOptions& opt = {});

/// Sum over `sites` of delta_i s_z^i (one detuning per listed site).
HamiltonianTerms detuning_terms(std::size_t num_sites, const std::vector<std::uint32_t>& sites,
                                const std::vector<double>& deltas);

}  // namespace nvlayer
