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

#include "nvlayer/geometry/layout.h"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <Eigen/Geometry>

#include "nvlayer/errors.h"

namespace nvlayer {

void SpinLayout::validate() const {
  if (std::abs(field_axis.norm() - 1.0) > 1e-12) {
    throw GeometryError("field_axis must have unit norm");
  }
  for (std::size_t i = 0; i < nuclear_positions.size(); ++i) {
    if ((nuclear_positions[i] - nv_position).norm() <= 0.0) {
      throw GeometryError("nucleus " + std::to_string(i) + " coincides with the NV");
    }
    for (std::size_t j = i + 1; j < nuclear_positions.size(); ++j) {
      if ((nuclear_positions[i] - nuclear_positions[j]).norm() <= 0.0) {
        throw GeometryError("nuclei " + std::to_string(i) + " and " + std::to_string(j) +
                            " share a position");
      }
    }
  }
}

Eigen::Matrix3d axis_angle_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

SpinLayout build_layer_grid(const GridSpec& spec) {
  if (!(spec.spacing_nm > 0.0)) throw GeometryError("grid spacing must be positive");
  if (!(spec.distance_nm > 0.0)) throw GeometryError("layer distance must be positive");
  if (spec.nx == 0 || spec.ny == 0) throw GeometryError("grid needs at least one site");
  if (spec.n_layers < 1 || spec.n_layers > 3) throw GeometryError("n_layers must be 1, 2 or 3");

  SpinLayout layout;
  layout.field_magnitude = spec.field_T;
  layout.layer_tilt = spec.tilt_rad;
  const Eigen::Matrix3d rot = axis_angle_rotation(Vec3::UnitX(), spec.tilt_rad);
  const double cx = 0.5 * static_cast<double>(spec.nx - 1);
  const double cy = 0.5 * static_cast<double>(spec.ny - 1);
  for (std::size_t l = 0; l < spec.n_layers; ++l) {
    for (std::size_t ix = 0; ix < spec.nx; ++ix) {
      for (std::size_t iy = 0; iy < spec.ny; ++iy) {
        Vec3 p((static_cast<double>(ix) - cx) * spec.spacing_nm + spec.offset_x_nm,
               (static_cast<double>(iy) - cy) * spec.spacing_nm + spec.offset_y_nm,
               spec.distance_nm + static_cast<double>(l) * spec.spacing_nm);
        layout.nuclear_positions.push_back(rot * p);
      }
    }
  }
  layout.validate();
  return layout;
}

SpinLayout build_chain(std::size_t n, double spacing_nm, double distance_nm, const Vec3& direction,
                       double field_T) {
  if (n == 0) throw GeometryError("chain needs at least one nucleus");
  if (!(spacing_nm > 0.0)) throw GeometryError("chain spacing must be positive");
  if (!(distance_nm > 0.0)) throw GeometryError("chain distance must be positive");
  const Vec3 u = direction.normalized();
  SpinLayout layout;
  layout.field_magnitude = field_T;
  layout.layer_tilt = 0.0;
  const double c = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    layout.nuclear_positions.push_back(Vec3(0, 0, distance_nm) +
                                       (static_cast<double>(i) - c) * spacing_nm * u);
  }
  layout.validate();
  return layout;
}

SpinLayout rotate_layout(const SpinLayout& layout, const Eigen::Matrix3d& rotation) {
  SpinLayout out = layout;
  out.nv_position = rotation * layout.nv_position;
  for (auto& p : out.nuclear_positions) p = rotation * p;
  out.field_axis = (rotation * layout.field_axis).normalized();
  return out;
}

std::string layout_to_table(const SpinLayout& layout) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# species x_nm y_nm z_nm\n";
  const auto row = [&](const char* species, const Vec3& p) {
    os << species << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  };
  row("NV", layout.nv_position);
  for (const auto& p : layout.nuclear_positions) row("C13", p);
  return os.str();
}

SpinLayout layout_from_table(const std::string& text) {
  SpinLayout layout;
  std::istringstream is(text);
  std::string line;
  bool have_nv = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string species;
    Vec3 p;
    if (!(ls >> species >> p.x() >> p.y() >> p.z())) {
      throw GeometryError("layout table line " + std::to_string(line_no) + " is malformed");
    }
    if (species == "NV") {
      if (have_nv) throw GeometryError("layout table lists more than one NV");
      layout.nv_position = p;
      have_nv = true;
    } else if (species == "C13") {
      layout.nuclear_positions.push_back(p);
    } else {
      throw GeometryError("unknown species '" + species + "' on line " + std::to_string(line_no));
    }
  }
  if (!have_nv) throw GeometryError("layout table has no NV row");
  layout.validate();
  return layout;
}

}  // namespace nvlayer
