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

#include "nvlayer/hamiltonian/builders.h"

#include <cmath>
#include <limits>

#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

constexpr Axis kAxes[3] = {Axis::X, Axis::Y, Axis::Z};

void check_sizes(const SpinLayout& layout, const CouplingSet& couplings) {
  const auto n = layout.num_nuclei();
  if (couplings.hyperfine.size() != n ||
      static_cast<std::size_t>(couplings.nuclear_dipolar.rows()) != n ||
      static_cast<std::size_t>(couplings.nuclear_dipolar.cols()) != n) {
    throw ConfigError("coupling set does not match the layout's " + std::to_string(n) +
                      " nuclei");
  }
}

// Adds dipolar pair terms with nuclei starting at `first_site`.
void add_dipolar(HamiltonianTerms::Builder& b, const SpinLayout& layout,
                 const CouplingSet& couplings, DipolarMode mode, double cutoff_nm,
                 std::uint32_t first_site) {
  const std::size_t n = layout.num_nuclei();
  const Eigen::Matrix3d frame = field_frame(layout.field_axis);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 r = layout.nuclear_positions[j] - layout.nuclear_positions[i];
      if (r.norm() > cutoff_nm) continue;
      const auto si = static_cast<std::uint32_t>(i) + first_site;
      const auto sj = static_cast<std::uint32_t>(j) + first_site;
      const double J = couplings.nuclear_dipolar(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j));
      if (mode == DipolarMode::kSecularFlipFlop) {
        if (J == 0.0) continue;
        b.add(PauliString::pair(si, Axis::Z, sj, Axis::Z), J);
        b.add(PauliString::pair(si, Axis::X, sj, Axis::X), -0.5 * J);
        b.add(PauliString::pair(si, Axis::Y, sj, Axis::Y), -0.5 * J);
      } else {
        // Full tensor pre (delta_ab - 3 u_a u_b); J already equals pre (1 - 3 u_z^2).
        const Vec3 u = frame * r.normalized();
        const double cz = u.z();
        const double denom = 1.0 - 3.0 * cz * cz;
        double pre;
        if (std::abs(denom) > 1e-12) {
          pre = J / denom;
        } else {
          const double rm = r.norm() * constants::kNanometer;
          pre = constants::kMu0Over4Pi * layout.nuclear_gyromagnetic_ratio *
                layout.nuclear_gyromagnetic_ratio * constants::kHbar / (rm * rm * rm);
        }
        for (int a = 0; a < 3; ++a) {
          for (int c = 0; c < 3; ++c) {
            const double t = pre * ((a == c ? 1.0 : 0.0) - 3.0 * u[a] * u[c]);
            b.add(PauliString::pair(si, kAxes[a], sj, kAxes[c]), t);
          }
        }
      }
    }
  }
}

}  // namespace

double resolve_dipolar_cutoff(const SpinLayout& layout, const HamiltonianOptions& opt) {
  if (opt.dipolar_cutoff_nm >= 0.0) return opt.dipolar_cutoff_nm;
  const std::size_t n = layout.num_nuclei();
  if (layout.num_spins() <= 25) return std::numeric_limits<double>::infinity();
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      min_d = std::min(min_d, (layout.nuclear_positions[i] - layout.nuclear_positions[j]).norm());
    }
  }
  return 3.0 * min_d * (1.0 + 1e-9);
}

HamiltonianTerms build_nuclear_dipolar(const SpinLayout& layout, const CouplingSet& couplings,
                                       DipolarMode mode, double cutoff_nm) {
  check_sizes(layout, couplings);
  HamiltonianTerms::Builder b(layout.num_spins());
  add_dipolar(b, layout, couplings, mode, cutoff_nm, 1);
  return b.build();
}

HamiltonianTerms build_secular_hamiltonian(const SpinLayout& layout, const CouplingSet& couplings,
                                           const HamiltonianOptions& opt) {
  check_sizes(layout, couplings);
  const std::size_t n = layout.num_nuclei();
  HamiltonianTerms::Builder b(layout.num_spins());
  for (std::size_t i = 0; i < n; ++i) {
    const auto site = static_cast<std::uint32_t>(i + 1);
    if (opt.include_zeeman) b.add(PauliString::single(site, Axis::Z), couplings.larmor);
    if (opt.include_hyperfine) {
      const Hyperfine& A = couplings.hyperfine[i];
      const double comp[3] = {A.zx, A.zy, A.zz};
      for (int k = 0; k < 3; ++k) {
        // S_z = s_z - 1/2 on the {0, -1} subspace.
        b.add(PauliString::pair(0, Axis::Z, site, kAxes[k]), comp[k]);
        b.add(PauliString::single(site, kAxes[k]), -0.5 * comp[k]);
      }
    }
  }
  if (opt.include_dipolar) {
    add_dipolar(b, layout, couplings, opt.dipolar_mode, resolve_dipolar_cutoff(layout, opt), 1);
  }
  return b.build();
}

HamiltonianTerms build_novel_hamiltonian(const SpinLayout& layout, const CouplingSet& couplings,
                                         double omega, const HamiltonianOptions& opt,
                                         DriveAxis drive) {
  if (omega < 0.0) throw ConfigError("spin-lock amplitude must be non-negative");
  HamiltonianTerms::Builder b(layout.num_spins());
  b.add_all(build_secular_hamiltonian(layout, couplings, opt));
  b.add(PauliString::single(0, drive == DriveAxis::kY ? Axis::Y : Axis::X), omega);
  return b.build();
}

HamiltonianTerms build_nuclear_frame_hamiltonian(const SpinLayout& layout,
                                                 const CouplingSet& couplings,
                                                 const HamiltonianOptions& opt) {
  check_sizes(layout, couplings);
  HamiltonianTerms::Builder b(layout.num_nuclei());
  if (opt.include_dipolar) {
    add_dipolar(b, layout, couplings, opt.dipolar_mode, resolve_dipolar_cutoff(layout, opt), 0);
  }
  return b.build();
}

HamiltonianTerms detuning_terms(std::size_t num_sites, const std::vector<std::uint32_t>& sites,
                                const std::vector<double>& deltas) {
  if (sites.size() != deltas.size()) throw ConfigError("detuning sites/values size mismatch");
  HamiltonianTerms::Builder b(num_sites);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    b.add(PauliString::single(sites[k], Axis::Z), deltas[k]);
  }
  return b.build(0.0);
}

}  // namespace nvlayer
