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

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "nvlayer/geometry/layout.h"
#include "nvlayer/hamiltonian/terms.h"
#include "nvlayer/pauli/pauli_string.h"

namespace nvlayer {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Computational-basis convention: bit k of a basis index is site k, 0 = spin up
// (sigma_z = +1; m_s = 0 for the NV).

inline constexpr std::size_t kDefaultMaxDenseSpins = 12;

/// Throws CapacityError when 2^n_sites exceeds the dense budget.
void check_dense_capacity(std::size_t n_sites, std::size_t max_spins = kDefaultMaxDenseSpins);

/// Dense matrix of sum_t coefficient_t prod sigma/2 over n_sites.
CMat hamiltonian_matrix(const HamiltonianTerms& h, std::size_t n_sites);
/// Dense Pauli-string matrix.
CMat pauli_matrix(const PauliString& p, std::size_t n_sites);

/// y = P x without forming P.
CVec apply_pauli(const PauliString& p, const CVec& x);

double expectation(const CVec& psi, const PauliString& p);
double expectation(const CMat& rho, const PauliString& p);

/// exp(-i angle/2 n.sigma).
Eigen::Matrix2cd rotation_unitary(const Vec3& axis, double angle);

/// psi -> U_site psi.
void apply_site_unitary(CVec& psi, std::uint32_t site, const Eigen::Matrix2cd& u);
/// rho -> U_site rho U_site^dagger.
void apply_site_unitary(CMat& rho, std::uint32_t site, const Eigen::Matrix2cd& u);

/// Product of single-site states, each given by a Bloch vector.
CMat product_density(const std::vector<Vec3>& bloch);
CVec product_pure(const std::vector<Vec3>& bloch);  // |v| must be 1

/// rho -> |0><0|_site (x) Tr_site(rho).
CMat laser_reset(const CMat& rho, std::uint32_t site);
/// Reduced density matrix with `site` traced out (dimension halves).
CMat partial_trace_site(const CMat& rho, std::uint32_t site);

/// Pauli coefficients <P> of rho for every string in `strings`.
std::vector<double> pauli_coefficients(const CMat& rho, const std::vector<PauliString>& strings);

}  // namespace nvlayer
