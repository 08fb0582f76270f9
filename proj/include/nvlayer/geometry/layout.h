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

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nvlayer/constants.h"

namespace nvlayer {

using Vec3 = Eigen::Vector3d;

/// NV center plus nuclear spins. Positions in nm; the NV is site 0 and nuclei are sites 1..n.
struct SpinLayout {
  Vec3 nv_position = Vec3::Zero();
  std::vector<Vec3> nuclear_positions;
  double nuclear_gyromagnetic_ratio = constants::kGamma13C;
  double electron_gyromagnetic_ratio = constants::kGammaElectron;
  double field_magnitude = 0.0;  // T
  Vec3 field_axis = Vec3::UnitZ();
  double layer_tilt = constants::kLayerTiltRad;

  std::size_t num_nuclei() const { return nuclear_positions.size(); }
  std::size_t num_spins() const { return nuclear_positions.size() + 1; }

  /// Throws GeometryError on a non-unit field axis or coincident spins.
  void validate() const;
};

struct GridSpec {
  std::size_t nx = 1;
  std::size_t ny = 1;
  double spacing_nm = constants::kCarbonNearestNeighborNm;
  double distance_nm = 1.0;
  double tilt_rad = constants::kLayerTiltRad;
  std::size_t n_layers = 1;
  // Lateral shift of the grid centroid relative to the NV axis, in the untilted grid plane.
  double offset_x_nm = 0.0;
  double offset_y_nm = 0.0;
  double field_T = 0.0;
};

/// Rectangular grid(s) in the plane z = distance (plus layer index times spacing), centered
/// under the NV, then rotated by the tilt about the x axis through the NV.
SpinLayout build_layer_grid(const GridSpec& spec);

/// Linear chain of n nuclei along `direction` (unit), centered on (0, 0, distance).
SpinLayout build_chain(std::size_t n, double spacing_nm, double distance_nm, const Vec3& direction,
                       double field_T);

/// Applies the same proper rotation to every position and to the field axis.
SpinLayout rotate_layout(const SpinLayout& layout, const Eigen::Matrix3d& rotation);

/// Rotation by `angle` about unit `axis` (right-handed).
Eigen::Matrix3d axis_angle_rotation(const Vec3& axis, double angle);

/// Plain-text table, one row per spin: "species x y z" (nm). NV first.
std::string layout_to_table(const SpinLayout& layout);
SpinLayout layout_from_table(const std::string& text);

}  // namespace nvlayer
