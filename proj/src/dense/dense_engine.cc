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

#include "nvlayer/dense/dense_engine.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

bool is_real_hamiltonian(const HamiltonianTerms& h) {
  for (const auto& t : h.terms()) {
    int ny = 0;
    for (const auto& f : t.product) ny += f.axis == Axis::Y;
    if (ny & 1) return false;
  }
  return true;
}

}  // namespace

DensePropagator::DensePropagator(const HamiltonianTerms& h, std::size_t n_sites,
                                 std::size_t max_spins)
    : dim_(std::size_t{1} << n_sites) {
  check_dense_capacity(n_sites, max_spins);
  real_ = is_real_hamiltonian(h);
  const CMat H = hamiltonian_matrix(h, n_sites);
  if (real_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.real());
    if (es.info() != Eigen::Success) throw DomainError("dense eigendecomposition failed");
    evals_ = es.eigenvalues();
    vr_ = es.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    if (es.info() != Eigen::Success) throw DomainError("dense eigendecomposition failed");
    evals_ = es.eigenvalues();
    vc_ = es.eigenvectors();
  }
}

CMat DensePropagator::unitary(double t) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  if (real_) {
    const Eigen::ArrayXd ph = evals_.array() * t;
    const Eigen::MatrixXd vc = vr_ * ph.cos().matrix().asDiagonal();
    const Eigen::MatrixXd vs = vr_ * ph.sin().matrix().asDiagonal();
    // Products land in plain temporaries first: a BLAS-backed gemm must not write through the
    // strided real()/imag() views.
    const Eigen::MatrixXd re = vc * vr_.transpose();
    const Eigen::MatrixXd im = vs * vr_.transpose();
    CMat u(n, n);
    u.real() = re;
    u.imag() = -im;
    return u;
  }
  Eigen::VectorXcd e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = std::polar(1.0, -evals_(i) * t);
  return (vc_ * e.asDiagonal()) * vc_.adjoint();
}

const CMat& DensePropagator::cached_unitary(double t) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = cache_.find(t);
  if (it == cache_.end()) it = cache_.emplace(t, std::make_unique<CMat>(unitary(t))).first;
  return *it->second;
}

void DensePropagator::evolve(CVec& psi, double t) const {
  if (static_cast<std::size_t>(psi.size()) != dim_) throw ConfigError("state dimension mismatch");
  if (t == 0.0) return;
  const auto n = static_cast<Eigen::Index>(dim_);
  if (real_) {
    const Eigen::VectorXd re = vr_.transpose() * Eigen::VectorXd(psi.real());
    const Eigen::VectorXd im = vr_.transpose() * Eigen::VectorXd(psi.imag());
    Eigen::VectorXd nre(n), nim(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = std::cos(evals_(i) * t), s = -std::sin(evals_(i) * t);
      nre(i) = c * re(i) - s * im(i);
      nim(i) = c * im(i) + s * re(i);
    }
    const Eigen::VectorXd out_re = vr_ * nre;
    const Eigen::VectorXd out_im = vr_ * nim;
    psi.real() = out_re;
    psi.imag() = out_im;
    return;
  }
  CVec a = vc_.adjoint() * psi;
  for (Eigen::Index i = 0; i < n; ++i) a(i) *= std::polar(1.0, -evals_(i) * t);
  psi = vc_ * a;
}

void DensePropagator::evolve(CMat& rho, double t) const {
  if (static_cast<std::size_t>(rho.rows()) != dim_) throw ConfigError("state dimension mismatch");
  if (t == 0.0) return;
  const CMat u = unitary(t);
  rho = (u * rho * u.adjoint()).eval();
}

CMat evolve_dense(const CMat& rho, const HamiltonianTerms& h, std::size_t n_sites, double t,
                  std::size_t max_spins) {
  DensePropagator p(h, n_sites, max_spins);
  CMat out = rho;
  p.evolve(out, t);
  return out;
}

}  // namespace nvlayer
