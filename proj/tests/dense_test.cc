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
#include <unsupported/Eigen/MatrixFunctions>

#include "nvlayer/dense/dense_engine.h"
#include "nvlayer/dense/dense_ops.h"
#include "nvlayer/dense/dephasing.h"
#include "nvlayer/errors.h"
#include "nvlayer/geometry/couplings.h"
#include "nvlayer/hamiltonian/builders.h"
#include "nvlayer/util/thread_pool.h"
#include "test_util.h"

using namespace nvlayer;
using nvlayer::oracle::oracle_pauli;

namespace {

CMat expm_oracle(const HamiltonianTerms& h, std::size_t n, double t) {
  const CMat a = cplx(0, -t) * oracle::oracle_hamiltonian(h, n);
  return a.exp();
}

CMat single_spin_x_state() { return product_density({Vec3::UnitX()}); }

}  // namespace

TEST(dense_propagator, unitary_matches_matrix_exponential_8_spins) {
  // Guards against a wrong BLAS product on the 256-dimensional path.
  SpinLayout l = build_chain(7, 0.26, 1.0, Vec3(1, 0.2, 0), 0.06);
  const HamiltonianTerms sec = build_secular_hamiltonian(l, compute_couplings(l));
  const HamiltonianTerms cplx_h = oracle::random_hamiltonian(8, 40, 3, 1e4, 2);
  for (const HamiltonianTerms* h : {&sec, &cplx_h}) {
    const double t = 2e-4;
    const DensePropagator p(*h, 8);
    const CMat u = p.unitary(t);
    const CMat ref = expm_oracle(*h, 8, t);
    EXPECT_LE((u - ref).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((u * u.adjoint() - CMat::Identity(256, 256)).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(dense_propagator, real_path_matches_complex_oracle) {
  HamiltonianTerms::Builder b(3);
  b.add(PauliString::parse("X0 X1"), 3e4).add(PauliString::parse("Y1 Y2"), -2e4);
  b.add(PauliString::parse("Z0"), 1e4).add(PauliString::parse("X2"), 5e3);
  const HamiltonianTerms h = b.build();
  const DensePropagator p(h, 3);
  EXPECT_TRUE(p.is_real());
  EXPECT_LE((p.unitary(1e-4) - expm_oracle(h, 3, 1e-4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(dense_propagator, evolve_state_and_density_consistent) {
  const HamiltonianTerms h = oracle::random_hamiltonian(4, 15, 2, 1e4, 3);
  const DensePropagator p(h, 4);
  const CMat u = p.unitary(3e-4);
  CVec psi = product_pure({Vec3::UnitX(), Vec3::UnitZ(), -Vec3::UnitY(), Vec3::UnitZ()});
  CMat rho = psi * psi.adjoint();
  const CVec ref = u * psi;
  p.evolve(psi, 3e-4);
  p.evolve(rho, 3e-4);
  EXPECT_LE((psi - ref).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((rho - ref * ref.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ(&p.cached_unitary(3e-4), &p.cached_unitary(3e-4));
  EXPECT_LE((p.cached_unitary(3e-4) - u).cwiseAbs().maxCoeff(), 0.0);
  const CVec psi0 = product_pure({Vec3::UnitX(), Vec3::UnitZ(), -Vec3::UnitY(), Vec3::UnitZ()});
  EXPECT_LE((evolve_dense(psi0 * psi0.adjoint(), h, 4, 3e-4) - ref * ref.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(dense_propagator, capacity_limit) {
  HamiltonianTerms::Builder b(14);
  b.add(PauliString::single(13, Axis::Z), 1.0);
  EXPECT_THROW(DensePropagator(b.build(), 14), CapacityError);
  EXPECT_THROW(check_dense_capacity(5, 4), CapacityError);
  EXPECT_NO_THROW(check_dense_capacity(4, 4));
}

TEST(dense_ops, pauli_application_and_expectation) {
  const CVec psi = product_pure({oracle::unit(0.3, 0.2), oracle::unit(1.2, -0.7), Vec3::UnitX()});
  for (const auto& p : oracle::all_strings(3)) {
    const CVec ref = oracle_pauli(p, 3) * psi;
    EXPECT_LE((apply_pauli(p, psi) - ref).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(expectation(psi, p), psi.dot(ref).real(), 1e-14);
    EXPECT_NEAR(expectation(CMat(psi * psi.adjoint()), p), psi.dot(ref).real(), 1e-14);
  }
}

TEST(dense_ops, product_states_carry_bloch_vectors) {
  const std::vector<Vec3> bloch = {Vec3(0.3, -0.2, 0.5), Vec3(0, 0, -1), oracle::unit(2.0, 1.0)};
  const CMat rho = product_density(bloch);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-15);
  for (std::uint32_t s = 0; s < 3; ++s) {
    EXPECT_NEAR(expectation(rho, PauliString::single(s, Axis::X)), bloch[s].x(), 1e-15);
    EXPECT_NEAR(expectation(rho, PauliString::single(s, Axis::Y)), bloch[s].y(), 1e-15);
    EXPECT_NEAR(expectation(rho, PauliString::single(s, Axis::Z)), bloch[s].z(), 1e-15);
  }
  EXPECT_NEAR(expectation(rho, PauliString::parse("X0 Z1")), bloch[0].x() * bloch[1].z(), 1e-15);
  EXPECT_THROW(product_pure({Vec3(0.5, 0, 0)}), DomainError);
}

TEST(dense_ops, rotation_unitary_closed_form) {
  const Vec3 n = Vec3(1, -2, 0.5).normalized();
  const double a = 0.83;
  Eigen::Matrix2cd sx, sy, sz;
  const cplx i(0, 1);
  sx << 0, 1, 1, 0;
  sy << 0, -i, i, 0;
  sz << 1, 0, 0, -1;
  const Eigen::Matrix2cd ref =
      std::cos(a / 2) * Eigen::Matrix2cd::Identity() - i * std::sin(a / 2) * (n.x() * sx + n.y() * sy + n.z() * sz);
  EXPECT_LE((rotation_unitary(n, a) - ref).cwiseAbs().maxCoeff(), 1e-15);
  // pi/2 about +Y takes +Z to +X.
  CVec psi = product_pure({Vec3::UnitZ()});
  apply_site_unitary(psi, 0, rotation_unitary(Vec3::UnitY(), constants::kPi / 2));
  EXPECT_NEAR(expectation(psi, PauliString::single(0, Axis::X)), 1.0, 1e-15);
}

TEST(dense_ops, site_unitary_matches_kron) {
  const Eigen::Matrix2cd u = rotation_unitary(Vec3(0.2, 0.4, 0.9).normalized(), 1.7);
  CMat rho = product_density({oracle::unit(0.4, 0.1) * 0.9, oracle::unit(1.4, 2.1), oracle::unit(2.2, -1.0) * 0.5});
  const CMat ref_u = std::cos(0.85) * CMat::Identity(8, 8) -
                     cplx(0, std::sin(0.85)) *
                         (Vec3(0.2, 0.4, 0.9).normalized().x() * oracle_pauli(PauliString::single(1, Axis::X), 3) +
                          Vec3(0.2, 0.4, 0.9).normalized().y() * oracle_pauli(PauliString::single(1, Axis::Y), 3) +
                          Vec3(0.2, 0.4, 0.9).normalized().z() * oracle_pauli(PauliString::single(1, Axis::Z), 3));
  const CMat ref = ref_u * rho * ref_u.adjoint();
  apply_site_unitary(rho, 1, u);
  EXPECT_LE((rho - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(dense_ops, laser_reset_and_partial_trace) {
  const std::vector<Vec3> bloch = {Vec3(0.6, 0, -0.7), Vec3(0, 0.5, 0.5), Vec3(0.3, 0, 0)};
  const CMat rho = product_density(bloch);
  const CMat r = laser_reset(rho, 0);
  EXPECT_NEAR(expectation(r, PauliString::single(0, Axis::Z)), 1.0, 1e-15);
  EXPECT_NEAR(expectation(r, PauliString::single(1, Axis::Y)), 0.5, 1e-15);
  EXPECT_NEAR(expectation(r, PauliString::parse("Z0 X2")), 0.3, 1e-15);
  const CMat reduced = partial_trace_site(rho, 1);
  const CMat ref = product_density({bloch[0], bloch[2]});
  EXPECT_LE((reduced - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(dephasing, envelope_closed_forms) {
  DephasingModel m;
  m.T2_s = 100e-6;
  EXPECT_NEAR(m.envelope(100e-6), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(m.envelope(37e-6), std::exp(-std::pow(0.37, 2)), 1e-15);
  m.law = SamplingLaw::kUniform;
  const double a = std::sqrt(3.0) * std::sqrt(2.0) * 0.37;
  EXPECT_NEAR(m.envelope(37e-6), std::sin(a) / a, 1e-15);
  EXPECT_EQ(m.envelope(0.0), 1.0);
  DephasingModel off;
  EXPECT_FALSE(off.active());
  EXPECT_EQ(off.scale(), 0.0);
  EXPECT_EQ(parse_sampling_law("uniform"), SamplingLaw::kUniform);
  EXPECT_THROW(parse_sampling_law("cauchy"), ConfigError);
}

TEST(dephasing, stream_statistics_and_seeding) {
  DephasingModel m;
  m.T2_s = 1e-4;
  m.seed = 42;
  for (SamplingLaw law : {SamplingLaw::kNormal, SamplingLaw::kUniform}) {
    m.law = law;
    double s1 = 0.0, s2 = 0.0;
    const std::size_t n = 20000;
    for (std::size_t p = 0; p < n; ++p) {
      DetuningStream s(m, p);
      std::vector<double> d;
      s.draw(d, 1);
      s1 += d[0];
      s2 += d[0] * d[0];
      if (law == SamplingLaw::kUniform) EXPECT_LE(std::abs(d[0]), std::sqrt(3.0) * m.scale());
    }
    EXPECT_NEAR(s1 / n, 0.0, 4.0 * m.scale() / std::sqrt(double(n)));
    EXPECT_NEAR(std::sqrt(s2 / n) / m.scale(), 1.0, 0.03);
  }
  DetuningStream a(m, 7), b(m, 7), c(m, 8);
  std::vector<double> da, db, dc;
  a.draw(da, 3);
  b.draw(db, 3);
  c.draw(dc, 3);
  EXPECT_EQ(da, db);
  EXPECT_NE(da, dc);
  m.common_mode = true;
  DetuningStream cm(m, 1);
  cm.draw(da, 4);
  EXPECT_EQ(da[0], da[3]);
}

TEST(dephasing, single_spin_ensemble_matches_envelope) {
  DephasingModel m;
  m.T2_s = 100e-6;
  m.n_samples = 4000;
  m.seed = 3;
  HamiltonianTerms::Builder b(1);
  const HamiltonianTerms h = b.build();
  for (double t : {30e-6, 100e-6, 200e-6}) {
    std::vector<DetuningStream> streams;
    for (std::size_t p = 0; p < m.n_samples; ++p) streams.emplace_back(m, p);
    CMat rho = single_spin_x_state();
    dephased_free_evolution(rho, h, 1, {0}, t, streams);
    // Standard error of a mean of cosines is at most 1/sqrt(S).
    EXPECT_NEAR(expectation(rho, PauliString::single(0, Axis::X)), m.envelope(t),
                4.0 / std::sqrt(double(m.n_samples)));
  }
}

TEST(dephasing, result_independent_of_pool_size) {
  DephasingModel m;
  m.T2_s = 50e-6;
  m.n_samples = 230;
  const HamiltonianTerms h = oracle::random_hamiltonian(3, 8, 2, 1e4, 4);
  const auto run = [&](ThreadPool* pool) {
    std::vector<DetuningStream> streams;
    for (std::size_t p = 0; p < m.n_samples; ++p) streams.emplace_back(m, p);
    CMat rho = product_density({Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()});
    dephased_free_evolution(rho, h, 3, {0, 1, 2}, 40e-6, streams, pool);
    return rho;
  };
  const CMat serial = run(nullptr);
  ThreadPool p2(2), p5(5);
  EXPECT_LE((run(&p2) - serial).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((run(&p5) - serial).cwiseAbs().maxCoeff(), 0.0);
}

TEST(thread_pool, covers_every_index_and_rethrows) {
  ThreadPool pool(4);
  std::vector<int> hit(1000, 0);
  pool.parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(pool.parallel_for(10, [](std::size_t i) { if (i == 3) throw DomainError("x"); }), DomainError);
  pool.parallel_for(0, [](std::size_t) { FAIL(); });
}
