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

#include "nvlayer/geometry/couplings.h"

#include <cmath>

#include <Eigen/Geometry>

#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

constexpr double kNm = constants::kNanometer;

// (mu0 / 4 pi) g1 g2 hbar / r^3 with r in nm.
double dipolar_prefactor(double g1, double g2, double r_nm) {
  const double r = r_nm * kNm;
  return constants::kMu0Over4Pi * g1 * g2 * constants::kHbar / (r * r * r);
}

}  // namespace

Eigen::Matrix3d field_frame(const Vec3& field_axis) {
  const Vec3 z = field_axis.normalized();
  Vec3 ref = Vec3::UnitX();
  if (std::abs(z.dot(ref)) > 0.9) ref = Vec3::UnitY();
  const Vec3 x = (ref - ref.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);
  Eigen::Matrix3d frame;
  frame.row(0) = x;
  frame.row(1) = y;
  frame.row(2) = z;
  return frame;
}

double nuclear_dipolar(const Vec3& r_nm, double gamma_n, const Vec3& field_axis) {
  const double r = r_nm.norm();
  if (!(r > 0.0)) throw GeometryError("dipolar coupling of zero-length separation");
  const double z = r_nm.dot(field_axis) / field_axis.norm();
  // (r^2 - 3 z^2) / r^2 rather than 1 - 3 cos^2 keeps exact magic-angle zeros exact.
  const double r2 = r_nm.squaredNorm();
  return dipolar_prefactor(gamma_n, gamma_n, r) * (r2 - 3.0 * z * z) / r2;
}

Hyperfine hyperfine_vector(const Vec3& r_nm, double gamma_e, double gamma_n,
                           const Vec3& field_axis, bool* below_validity) {
  const double r = r_nm.norm();
  if (!(r > 0.0)) throw GeometryError("hyperfine coupling of zero-length separation");
  if (below_validity) *below_validity = r < 2.0 * constants::kDiamondLatticeConstantNm;
  const Vec3 u = field_frame(field_axis) * (r_nm / r);
  const double pre = dipolar_prefactor(gamma_e, gamma_n, r);
  return Hyperfine{-3.0 * pre * u.z() * u.x(), -3.0 * pre * u.z() * u.y(),
                   pre * (1.0 - 3.0 * u.z() * u.z())};
}

CouplingSet compute_couplings(const SpinLayout& layout, std::size_t* n_below_validity) {
  layout.validate();
  const std::size_t n = layout.num_nuclei();
  CouplingSet c;
  c.larmor = layout.nuclear_gyromagnetic_ratio * layout.field_magnitude;
  c.hyperfine.reserve(n);
  std::size_t below = 0;
  for (const auto& p : layout.nuclear_positions) {
    bool flag = false;
    c.hyperfine.push_back(hyperfine_vector(p - layout.nv_position,
                                           layout.electron_gyromagnetic_ratio,
                                           layout.nuclear_gyromagnetic_ratio, layout.field_axis,
                                           &flag));
    below += flag ? 1 : 0;
  }
  c.nuclear_dipolar = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double J = nuclear_dipolar(layout.nuclear_positions[j] - layout.nuclear_positions[i],
                                       layout.nuclear_gyromagnetic_ratio, layout.field_axis);
      c.nuclear_dipolar(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = J;
      c.nuclear_dipolar(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = J;
    }
  }
  if (n_below_validity) *n_below_validity = below;
  return c;
}

}  // namespace nvlayer
