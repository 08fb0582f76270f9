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

#include "nvlayer/dense/dense_ops.h"

#include <algorithm>
#include <cmath>

#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

struct PauliMasks {
  std::uint64_t flip = 0;  // X or Y
  std::uint64_t y = 0;
  std::uint64_t z = 0;     // Z or Y (sign on bit 1)
  int n_y = 0;
};

PauliMasks masks(const PauliString& p) {
  PauliMasks m;
  for (const auto& f : p) {
    const std::uint64_t b = std::uint64_t{1} << f.site;
    if (f.axis == Axis::X || f.axis == Axis::Y) m.flip |= b;
    if (f.axis == Axis::Y) {
      m.y |= b;
      ++m.n_y;
    }
    if (f.axis == Axis::Z || f.axis == Axis::Y) m.z |= b;
  }
  return m;
}

// P e_j = phase(j) e_{j ^ flip}. Y e_0 = i e_1 and Y e_1 = -i e_0, i.e. i^{n_y} (-1)^{popcount(j & z)}.
cplx phase(const PauliMasks& m, std::uint64_t j) {
  static const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
  const int neg = __builtin_popcountll(j & m.z) & 1;
  const cplx base = ipow[m.n_y & 3];
  return neg ? -base : base;
}

std::size_t dim_of(std::size_t n_sites) { return std::size_t{1} << n_sites; }

Eigen::Matrix2cd bloch_density(const Vec3& v) {
  Eigen::Matrix2cd r;
  r(0, 0) = 0.5 * (1.0 + v.z());
  r(1, 1) = 0.5 * (1.0 - v.z());
  r(0, 1) = 0.5 * cplx(v.x(), -v.y());
  r(1, 0) = 0.5 * cplx(v.x(), v.y());
  return r;
}

}  // namespace

void check_dense_capacity(std::size_t n_sites, std::size_t max_spins) {
  if (n_sites > max_spins) {
    throw CapacityError("dense simulation of " + std::to_string(n_sites) +
                            " spins exceeds the limit of " + std::to_string(max_spins) +
                            "; use the truncated engine or raise dense.max_spins",
                        n_sites);
  }
}

CMat pauli_matrix(const PauliString& p, std::size_t n_sites) {
  const std::size_t d = dim_of(n_sites);
  const PauliMasks m = masks(p);
  CMat M = CMat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::uint64_t j = 0; j < d; ++j) {
    M(static_cast<Eigen::Index>(j ^ m.flip), static_cast<Eigen::Index>(j)) = phase(m, j);
  }
  return M;
}

CMat hamiltonian_matrix(const HamiltonianTerms& h, std::size_t n_sites) {
  if (h.num_sites() > n_sites) throw ConfigError("Hamiltonian has more sites than the dense space");
  const std::size_t d = dim_of(n_sites);
  CMat M = CMat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const auto& t : h.terms()) {
    const PauliMasks m = masks(t.product);
    const double w = t.pauli_weight();
    for (std::uint64_t j = 0; j < d; ++j) {
      M(static_cast<Eigen::Index>(j ^ m.flip), static_cast<Eigen::Index>(j)) += w * phase(m, j);
    }
  }
  return M;
}

CVec apply_pauli(const PauliString& p, const CVec& x) {
  const PauliMasks m = masks(p);
  CVec y(x.size());
  for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(x.size()); ++j) {
    y(static_cast<Eigen::Index>(j ^ m.flip)) = phase(m, j) * x(static_cast<Eigen::Index>(j));
  }
  return y;
}

double expectation(const CVec& psi, const PauliString& p) {
  return psi.dot(apply_pauli(p, psi)).real();
}

double expectation(const CMat& rho, const PauliString& p) {
  const PauliMasks m = masks(p);
  cplx acc = 0.0;
  for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(rho.rows()); ++j) {
    acc += rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j ^ m.flip)) * phase(m, j);
  }
  return acc.real();
}

Eigen::Matrix2cd rotation_unitary(const Vec3& axis, double angle) {
  const Vec3 n = axis.normalized();
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  Eigen::Matrix2cd u;
  u(0, 0) = cplx(c, -s * n.z());
  u(1, 1) = cplx(c, s * n.z());
  u(0, 1) = cplx(-s * n.y(), -s * n.x());
  u(1, 0) = cplx(s * n.y(), -s * n.x());
  return u;
}

void apply_site_unitary(CVec& psi, std::uint32_t site, const Eigen::Matrix2cd& u) {
  const std::uint64_t b = std::uint64_t{1} << site;
  const auto d = static_cast<std::uint64_t>(psi.size());
  for (std::uint64_t j = 0; j < d; ++j) {
    if (j & b) continue;
    const auto i0 = static_cast<Eigen::Index>(j);
    const auto i1 = static_cast<Eigen::Index>(j | b);
    const cplx a0 = psi(i0), a1 = psi(i1);
    psi(i0) = u(0, 0) * a0 + u(0, 1) * a1;
    psi(i1) = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

void apply_site_unitary(CMat& rho, std::uint32_t site, const Eigen::Matrix2cd& u) {
  const std::uint64_t b = std::uint64_t{1} << site;
  const auto d = static_cast<std::uint64_t>(rho.rows());
  const cplx c00 = std::conj(u(0, 0)), c01 = std::conj(u(0, 1));
  const cplx c10 = std::conj(u(1, 0)), c11 = std::conj(u(1, 1));
  for (std::uint64_t j = 0; j < d; ++j) {
    if (j & b) continue;
    const auto i0 = static_cast<Eigen::Index>(j);
    const auto i1 = static_cast<Eigen::Index>(j | b);
    // Columns: rho U^dagger.
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
      const cplx a0 = rho(r, i0), a1 = rho(r, i1);
      rho(r, i0) = a0 * c00 + a1 * c01;
      rho(r, i1) = a0 * c10 + a1 * c11;
    }
  }
  for (std::uint64_t j = 0; j < d; ++j) {
    if (j & b) continue;
    const auto i0 = static_cast<Eigen::Index>(j);
    const auto i1 = static_cast<Eigen::Index>(j | b);
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      const cplx a0 = rho(i0, c), a1 = rho(i1, c);
      rho(i0, c) = u(0, 0) * a0 + u(0, 1) * a1;
      rho(i1, c) = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

CMat product_density(const std::vector<Vec3>& bloch) {
  check_dense_capacity(bloch.size(), 14);
  CMat m = CMat::Ones(1, 1);
  // Site 0 is the least significant bit, so it is the last Kronecker factor.
  for (std::size_t k = bloch.size(); k-- > 0;) {
    const Eigen::Matrix2cd r = bloch_density(bloch[k]);
    CMat next(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) next.block<2, 2>(2 * i, 2 * j) = m(i, j) * r;
    }
    m.swap(next);
  }
  return m;
}

CVec product_pure(const std::vector<Vec3>& bloch) {
  CVec v = CVec::Ones(1);
  for (std::size_t k = bloch.size(); k-- > 0;) {
    const Vec3& b = bloch[k];
    if (std::abs(b.norm() - 1.0) > 1e-9) throw DomainError("pure product state needs unit Bloch vectors");
    const double theta = std::acos(std::clamp(b.z(), -1.0, 1.0));
    const double phi = std::atan2(b.y(), b.x());
    const cplx a0 = std::cos(0.5 * theta);
    const cplx a1 = std::polar(std::sin(0.5 * theta), phi);
    CVec next(v.size() * 2);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      next(2 * i) = v(i) * a0;
      next(2 * i + 1) = v(i) * a1;
    }
    v.swap(next);
  }
  return v;
}

CMat laser_reset(const CMat& rho, std::uint32_t site) {
  const std::uint64_t b = std::uint64_t{1} << site;
  const auto d = static_cast<std::uint64_t>(rho.rows());
  CMat out = CMat::Zero(rho.rows(), rho.cols());
  for (std::uint64_t j = 0; j < d; ++j) {
    if (j & b) continue;
    for (std::uint64_t i = 0; i < d; ++i) {
      if (i & b) continue;
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
          rho(static_cast<Eigen::Index>(i | b), static_cast<Eigen::Index>(j | b));
    }
  }
  return out;
}

CMat partial_trace_site(const CMat& rho, std::uint32_t site) {
  const std::uint64_t b = std::uint64_t{1} << site;
  const auto d = static_cast<std::uint64_t>(rho.rows());
  const auto compress = [&](std::uint64_t j) {
    return static_cast<Eigen::Index>((j & (b - 1)) | ((j >> 1) & ~(b - 1)));
  };
  CMat out = CMat::Zero(static_cast<Eigen::Index>(d / 2), static_cast<Eigen::Index>(d / 2));
  for (std::uint64_t j = 0; j < d; ++j) {
    if (j & b) continue;
    for (std::uint64_t i = 0; i < d; ++i) {
      if (i & b) continue;
      out(compress(i), compress(j)) =
          rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
          rho(static_cast<Eigen::Index>(i | b), static_cast<Eigen::Index>(j | b));
    }
  }
  return out;
}

std::vector<double> pauli_coefficients(const CMat& rho, const std::vector<PauliString>& strings) {
  std::vector<double> c;
  c.reserve(strings.size());
  for (const auto& p : strings) c.push_back(expectation(rho, p));
  return c;
}

}  // namespace nvlayer
