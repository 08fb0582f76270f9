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

#include <vector>

#include <Eigen/Core>

#include "nvlayer/geometry/layout.h"

namespace nvlayer {

/// Secular hyperfine row (A_zx, A_zy, A_zz) in rad/s, field frame.
struct Hyperfine {
  double zx = 0.0;
  double zy = 0.0;
  double zz = 0.0;
};

struct CouplingSet {
  std::vector<Hyperfine> hyperfine;  // one per nucleus
  Eigen::MatrixXd nuclear_dipolar;   // symmetric J_ij in rad/s, zero diagonal
  double larmor = 0.0;               // gamma_N * B in rad/s

  std::size_t num_nuclei() const { return hyperfine.size(); }
};

/// Orthonormal (x, y, z) frame with z along `field_axis`. The x axis is the projection of
/// the lab x axis (lab y if x is nearly parallel to the field).
Eigen::Matrix3d field_frame(const Vec3& field_axis);

/// J = (mu0/4pi) gamma^2 hbar (1 - 3 cos^2 theta) / r^3 in rad/s. `r_nm` in nm.
double nuclear_dipolar(const Vec3& r_nm, double gamma_n, const Vec3& field_axis);

/// Point-dipole row coupling S_z to (I_x, I_y, I_z). `r_nm` points from the NV to the nucleus.
/// Sets *below_validity when |r| < 2 a0 (point-dipole model questionable there).
Hyperfine hyperfine_vector(const Vec3& r_nm, double gamma_e, double gamma_n,
                           const Vec3& field_axis, bool* below_validity = nullptr);

/// All couplings for a layout. Hyperfine rows below the point-dipole validity radius are
/// counted in *n_below_validity when given.
CouplingSet compute_couplings(const SpinLayout& layout, std::size_t* n_below_validity = nullptr);

}  // namespace nvlayer
