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
#include <cmath>

#include <gtest/gtest.h>

#include "nvlayer/constants.h"
#include "nvlayer/errors.h"
#include "nvlayer/geometry/couplings.h"
#include "nvlayer/geometry/layout.h"

using namespace nvlayer;

namespace {

double prefactor(double g1, double g2, double r_nm) {
  const double r = r_nm * 1e-9;
  return constants::kMu0Over4Pi * g1 * g2 * constants::kHbar / (r * r * r);
}

}  // namespace

TEST(layout, grid_counts_and_centroid) {
  GridSpec g;
  g.nx = 3;
  g.ny = 4;
  g.spacing_nm = 0.26;
  g.distance_nm = 1.0;
  g.tilt_rad = 0.0;
  const SpinLayout l = build_layer_grid(g);
  ASSERT_EQ(l.num_nuclei(), 12u);
  Vec3 c = Vec3::Zero();
  for (const auto& p : l.nuclear_positions) c += p;
  c /= 12.0;
  EXPECT_NEAR(c.x(), 0.0, 1e-12);
  EXPECT_NEAR(c.y(), 0.0, 1e-12);
  EXPECT_NEAR(c.z(), 1.0, 1e-12);
}

TEST(layout, tilt_preserves_pair_distances) {
  GridSpec g;
  g.nx = 3;
  g.ny = 3;
  g.spacing_nm = 0.26;
  g.tilt_rad = 0.0;
  const SpinLayout flat = build_layer_grid(g);
  g.tilt_rad = constants::kLayerTiltRad;
  const SpinLayout tilted = build_layer_grid(g);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_NEAR((flat.nuclear_positions[i] - flat.nuclear_positions[j]).norm(),
                  (tilted.nuclear_positions[i] - tilted.nuclear_positions[j]).norm(), 1e-12);
    }
  }
}

TEST(layout, rejects_bad_geometry) {
  GridSpec g;
  g.spacing_nm = 0.0;
  EXPECT_THROW(build_layer_grid(g), GeometryError);
  g.spacing_nm = 0.2;
  g.nx = 0;
  EXPECT_THROW(build_layer_grid(g), GeometryError);
  SpinLayout l;
  l.nuclear_positions = {Vec3(0, 0, 1), Vec3(0, 0, 1)};
  EXPECT_THROW(l.validate(), GeometryError);
  l.nuclear_positions = {Vec3::Zero()};
  EXPECT_THROW(l.validate(), GeometryError);
  l.nuclear_positions = {Vec3(0, 0, 1)};
  l.field_axis = Vec3(0, 0, 2);
  EXPECT_THROW(l.validate(), GeometryError);
}

TEST(layout, table_round_trip) {
  SpinLayout l = build_chain(5, 0.154, 1.1, Vec3(1, 1, 0), 0.06);
  const SpinLayout back = layout_from_table(layout_to_table(l));
  ASSERT_EQ(back.num_nuclei(), l.num_nuclei());
  for (std::size_t i = 0; i < l.num_nuclei(); ++i) {
    EXPECT_EQ(back.nuclear_positions[i], l.nuclear_positions[i]);
  }
}

TEST(couplings, on_axis_hyperfine_matches_closed_form) {
  const double r = 0.8;
  const Hyperfine a = hyperfine_vector(Vec3(0, 0, r), constants::kGammaElectron,
                                       constants::kGamma13C, Vec3::UnitZ());
  const double pre = prefactor(constants::kGammaElectron, constants::kGamma13C, r);
  EXPECT_NEAR(a.zz, -2.0 * pre, 1e-9 * std::abs(pre));
  EXPECT_NEAR(a.zx, 0.0, 1e-12);
  EXPECT_NEAR(a.zy, 0.0, 1e-12);
  // On-axis coupling at 1 nm is 2 * 19.88 kHz in cyclic units.
  const Hyperfine b = hyperfine_vector(Vec3(0, 0, 1.0), constants::kGammaElectron,
                                       constants::kGamma13C, Vec3::UnitZ());
  EXPECT_NEAR(std::abs(b.zz) / constants::kTwoPi, 2.0 * 19.88e3, 0.05e3);
}

TEST(couplings, hyperfine_perpendicular_to_transverse_plane) {
  // Transverse component lies along the in-plane direction of the nucleus.
  const Vec3 r(0.3, 0.4, 0.9);
  const Hyperfine a = hyperfine_vector(r, constants::kGammaElectron, constants::kGamma13C,
                                       Vec3::UnitZ());
  EXPECT_NEAR(a.zy / a.zx, 0.4 / 0.3, 1e-12);
  const double pre = prefactor(constants::kGammaElectron, constants::kGamma13C, r.norm());
  const double ct = 0.9 / r.norm();
  EXPECT_NEAR(std::hypot(a.zx, a.zy), std::abs(3.0 * pre * ct * std::sqrt(1 - ct * ct)),
              1e-9 * std::abs(pre));
}

TEST(couplings, dipolar_closed_form_and_magic_angle) {
  const double d = constants::kCarbonNearestNeighborNm;
  const double pre = prefactor(constants::kGamma13C, constants::kGamma13C, d);
  EXPECT_NEAR(nuclear_dipolar(Vec3(d, 0, 0), constants::kGamma13C, Vec3::UnitZ()), pre,
              1e-12 * pre);
  EXPECT_NEAR(nuclear_dipolar(Vec3(0, 0, d), constants::kGamma13C, Vec3::UnitZ()), -2.0 * pre,
              1e-12 * pre);
  // A bond perpendicular to B at 0.154 nm couples with about 2 kHz.
  EXPECT_NEAR(pre / constants::kTwoPi, 2080.0, 20.0);
  // (1, 1, 1) sits exactly at the magic angle from z.
  EXPECT_LE(std::abs(nuclear_dipolar(Vec3(1, 1, 1) * 0.2, constants::kGamma13C, Vec3::UnitZ())),
            1e-12);
}

TEST(couplings, rotation_covariance) {
  SpinLayout l = build_chain(4, 0.2, 0.9, Vec3(1, 0.3, 0.1), 0.05);
  l.field_axis = Vec3(0.0, 0.6, 0.8);
  const CouplingSet a = compute_couplings(l);
  const Eigen::Matrix3d R = axis_angle_rotation(Vec3(0.2, -1.0, 0.5), 0.77);
  const CouplingSet b = compute_couplings(rotate_layout(l, R));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(a.hyperfine[i].zz, b.hyperfine[i].zz, 1e-9 * std::abs(a.hyperfine[i].zz) + 1e-6);
    EXPECT_NEAR(std::hypot(a.hyperfine[i].zx, a.hyperfine[i].zy),
                std::hypot(b.hyperfine[i].zx, b.hyperfine[i].zy), 1e-6);
  }
  EXPECT_LE((a.nuclear_dipolar - b.nuclear_dipolar).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_DOUBLE_EQ(a.larmor, constants::kGamma13C * 0.05);
}

TEST(couplings, dipolar_matrix_symmetric_zero_diagonal) {
  GridSpec g;
  g.nx = 3;
  g.ny = 3;
  g.spacing_nm = 0.26;
  const CouplingSet c = compute_couplings(build_layer_grid(g));
  EXPECT_EQ((c.nuclear_dipolar - c.nuclear_dipolar.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(c.nuclear_dipolar.diagonal().cwiseAbs().maxCoeff(), 0.0);
}

TEST(couplings, grid_mean_pair_coupling) {
  // 3x3 grid at 0.26 nm, tilted by 54.7 degrees: mean |J| over all 36 pairs from the closed
  // form is 2 pi * 158 Hz.
  GridSpec g;
  g.nx = 3;
  g.ny = 3;
  g.spacing_nm = 0.26;
  const CouplingSet c = compute_couplings(build_layer_grid(g));
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = i + 1; j < 9; ++j) {
      sum += std::abs(c.nuclear_dipolar(i, j));
      ++count;
    }
  }
  EXPECT_EQ(count, 36);
  EXPECT_NEAR(sum / count / constants::kTwoPi, 158.1, 0.5);
}
