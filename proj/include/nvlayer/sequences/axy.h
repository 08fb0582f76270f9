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

#include "nvlayer/sequences/schedule.h"

namespace nvlayer {

inline constexpr std::array<double, 8> kXy8Phases = {0.0, 0.5 * constants::kPi, 0.0,
                                                     0.5 * constants::kPi, 0.5 * constants::kPi,
                                                     0.0, 0.5 * constants::kPi, 0.0};
inline constexpr std::array<double, 5> kKnillPhases = {constants::kPi / 6.0, 0.0,
                                                       0.5 * constants::kPi, 0.0,
                                                       constants::kPi / 6.0};

/// Pulse positions of one composite block, as fractions of the block duration.
struct AxyTiming {
  std::array<double, 4> f{};  // requested harmonics f1..f4
  double x1 = 0.0;
  double x2 = 0.0;

  std::array<double, 5> fractions() const { return {x1, x2, 0.5, 1.0 - x2, 1.0 - x1}; }
};

/// k-th cosine harmonic of the +-1 modulation function generated by pulses at
/// (x1, x2, 1/2, 1-x2, 1-x1) with period two blocks: (4/(k pi)) sum_j (-1)^(j-1) sin(k pi x_j).
/// Even harmonics vanish identically.
double axy_harmonic(double x1, double x2, int k);

/// Solves f1(x1, x2) = f[0], f3(x1, x2) = f[2] with 0 < x1 < x2 < 1/2 to `tol`.
/// Throws InfeasibleError when no root exists or when nonzero even harmonics are requested.
AxyTiming solve_axy_timing(const std::array<double, 4>& f, double tol = 1e-10);

struct AxyOptions {
  bool knill_phases = true;
  // pi/2 about +Y before and about -Y after the train.
  bool bracket = true;
  std::uint32_t nv_site = 0;
};

/// n_blocks composite blocks of duration 1/(2 nu) each, phase-cycled with the XY-8 pattern.
/// Free evolution uses Hamiltonian index 0.
PulseSchedule axy_schedule(const AxyTiming& timing, double nu_hz, std::size_t n_blocks,
                           const AxyOptions& opt = {});

}  // namespace nvlayer
