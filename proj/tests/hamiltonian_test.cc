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

#include "nvlayer/dense/dense_engine.h"
#include "nvlayer/dense/dense_ops.h"
#include "nvlayer/errors.h"
#include "nvlayer/geometry/couplings.h"
#include "nvlayer/hamiltonian/builders.h"
#include "test_util.h"

using namespace nvlayer;

namespace {

// Single-site operators, independent of the library's Pauli machinery.
Eigen::Matrix2cd spin_op(char a) {
  Eigen::Matrix2cd m;
  const cplx i(0, 1);
  switch (a) {
    case 'x': m << 0, 0.5, 0.5, 0; break;
    case 'y': m << 0, -0.5 * i, 0.5 * i, 0; break;
    case 'z': m << 0.5, 0, 0, -0.5; break;
    case 'S': m << 0, 0, 0, -1; break;  // NV S_z on {m_s=0, m_s=-1}
    default: m.setIdentity();
  }
  return m;
}

// Operator with `ops[k]` on site k; site 0 is the least significant bit.
CMat kron_ops(const std::vector<char>& ops) {
  CMat out = CMat::Identity(1, 1);
  for (char c : ops) {
    const Eigen::Matrix2cd s = spin_op(c);
    CMat next(out.rows() * 2, out.cols() * 2);
    // New site is more significant: next = s (x) out.
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) next.block(a * out.rows(), b * out.cols(), out.rows(), out.cols()) = s(a, b) * out;
    out = next;
  }
  return out;
}

CMat op_on(std::size_t n_sites, std::vector<std::pair<std::size_t, char>> factors) {
  std::vector<char> ops(n_sites, '1');
  for (auto [s, c] : factors) ops[s] = c;
  return kron_ops(ops);
}

}  // namespace

TEST(hamiltonian_terms, builder_merges_and_drops_identity) {
  HamiltonianTerms::Builder b(3);
  b.add(PauliString::single(1, Axis::Z), 1.0);
  b.add(PauliString::single(1, Axis::Z), 2.0);
  b.add(PauliString(), 5.0);
  b.add(PauliString::pair(0, Axis::X, 2, Axis::Y), 1.0);
  b.add(PauliString::pair(0, Axis::X, 2, Axis::Y), -1.0);
  const HamiltonianTerms h = b.build();
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.terms()[0].product, PauliString::single(1, Axis::Z));
  EXPECT_DOUBLE_EQ(h.terms()[0].coefficient, 3.0);
  EXPECT_DOUBLE_EQ(h.terms()[0].pauli_weight(), 1.5);
}

TEST(hamiltonian_terms, hash_and_equality) {
  const HamiltonianTerms a = oracle::random_hamiltonian(4, 12, 3, 1e4, 7);
  const HamiltonianTerms b = oracle::random_hamiltonian(4, 12, 3, 1e4, 7);
  const HamiltonianTerms c = oracle::random_hamiltonian(4, 12, 3, 1e4, 8);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_NE(a.hash(), a.scaled(2.0).hash());
  EXPECT_EQ(a.to_text(), b.to_text());
  EXPECT_EQ(a.plus(a), a.scaled(2.0));
}

TEST(hamiltonian_terms, transverse_query) {
  HamiltonianTerms::Builder b(3);
  b.add(PauliString::pair(0, Axis::Z, 1, Axis::X), 1.0);
  b.add(PauliString::single(2, Axis::Z), 1.0);
  const HamiltonianTerms h = b.build();
  EXPECT_FALSE(h.has_transverse_on(0));
  EXPECT_TRUE(h.has_transverse_on(1));
  EXPECT_FALSE(h.has_transverse_on(2));
}

TEST(hamiltonian_builders, on_axis_nucleus_gives_two_groups) {
  SpinLayout l;
  l.nuclear_positions = {Vec3(0, 0, 0.9)};
  l.field_magnitude = 0.05;
  const CouplingSet c = compute_couplings(l);
  const HamiltonianTerms h = build_secular_hamiltonian(l, c);
  ASSERT_EQ(h.size(), 2u);
  const Hyperfine& a = c.hyperfine[0];
  for (const Term& t : h.terms()) {
    if (t.product == PauliString::single(1, Axis::Z)) {
      EXPECT_NEAR(t.coefficient, c.larmor - 0.5 * a.zz, 1e-9);
    } else {
      EXPECT_EQ(t.product, PauliString::pair(0, Axis::Z, 1, Axis::Z));
      EXPECT_NEAR(t.coefficient, a.zz, 1e-9);
    }
  }
}

TEST(hamiltonian_builders, secular_matches_kron_oracle) {
  SpinLayout l = build_chain(3, 0.2, 0.7, Vec3(1, 0.4, 0.2), 0.03);
  l.field_axis = Vec3(0.1, 0.2, 1.0).normalized();
  const CouplingSet c = compute_couplings(l);
  const std::size_t n = 4;
  CMat ref = CMat::Zero(16, 16);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t s = i + 1;
    ref += c.larmor * op_on(n, {{s, 'z'}});
    ref += c.hyperfine[i].zx * op_on(n, {{0, 'S'}, {s, 'x'}});
    ref += c.hyperfine[i].zy * op_on(n, {{0, 'S'}, {s, 'y'}});
    ref += c.hyperfine[i].zz * op_on(n, {{0, 'S'}, {s, 'z'}});
    for (std::size_t j = i + 1; j < 3; ++j) {
      const std::size_t t = j + 1;
      const double J = c.nuclear_dipolar(i, j);
      ref += J * (op_on(n, {{s, 'z'}, {t, 'z'}}) -
                  0.5 * (op_on(n, {{s, 'x'}, {t, 'x'}}) + op_on(n, {{s, 'y'}, {t, 'y'}})));
    }
  }
  const CMat got = hamiltonian_matrix(build_secular_hamiltonian(l, c), n);
  EXPECT_LE((got - ref).cwiseAbs().maxCoeff(), 1e-9 * ref.cwiseAbs().maxCoeff());
}

TEST(hamiltonian_builders, full_dipolar_reduces_to_secular_part) {
  // Averaging the full tensor over a fast Zeeman rotation keeps only the secular part; check the
  // diagonal (zz) element and that both forms share the trace-free property.
  SpinLayout l = build_chain(2, 0.2, 1.0, Vec3(1, 0, 0.5), 0.05);
  const CouplingSet c = compute_couplings(l);
  const HamiltonianTerms full = build_nuclear_dipolar(l, c, DipolarMode::kFull, 10.0);
  const HamiltonianTerms sec = build_nuclear_dipolar(l, c, DipolarMode::kSecularFlipFlop, 10.0);
  double zz_full = 0.0, zz_sec = 0.0;
  for (const Term& t : full.terms())
    if (t.product == PauliString::pair(1, Axis::Z, 2, Axis::Z)) zz_full = t.coefficient;
  for (const Term& t : sec.terms())
    if (t.product == PauliString::pair(1, Axis::Z, 2, Axis::Z)) zz_sec = t.coefficient;
  EXPECT_NEAR(zz_full, zz_sec, 1e-9 * std::abs(zz_sec));
  const CMat m = hamiltonian_matrix(full, 3);
  EXPECT_NEAR(std::abs(m.trace()), 0.0, 1e-9);
}

TEST(hamiltonian_builders, cutoff_and_switches) {
  SpinLayout l = build_chain(4, 0.2, 1.0, Vec3(1, 0, 0), 0.05);
  const CouplingSet c = compute_couplings(l);
  HamiltonianOptions opt;
  opt.dipolar_cutoff_nm = 0.25;
  const HamiltonianTerms nn = build_secular_hamiltonian(l, c, opt);
  std::size_t zz_pairs = 0;
  for (const Term& t : nn.terms())
    if (t.product.weight() == 2 && !t.product.acts_on(0) && t.product.factor(0).axis == Axis::Z) ++zz_pairs;
  EXPECT_EQ(zz_pairs, 3u);
  opt.include_dipolar = false;
  opt.include_hyperfine = false;
  EXPECT_EQ(build_secular_hamiltonian(l, c, opt).size(), 4u);
  EXPECT_TRUE(std::isinf(resolve_dipolar_cutoff(l, HamiltonianOptions{})));
}

TEST(hamiltonian_builders, rejects_mismatched_couplings) {
  SpinLayout l = build_chain(3, 0.2, 1.0, Vec3(1, 0, 0), 0.05);
  CouplingSet c = compute_couplings(l);
  c.hyperfine.pop_back();
  EXPECT_THROW(build_secular_hamiltonian(l, c), ConfigError);
  EXPECT_THROW(build_novel_hamiltonian(l, compute_couplings(l), -1.0), ConfigError);
}

TEST(hamiltonian_matrix, hermitian_and_real_detection) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const HamiltonianTerms h = oracle::random_hamiltonian(4, 20, 3, 1.0, seed);
    const CMat m = hamiltonian_matrix(h, 4);
    EXPECT_LE((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    bool even_y = true;
    for (const Term& t : h.terms()) {
      int ny = 0;
      for (const auto& f : t.product) ny += f.axis == Axis::Y;
      even_y = even_y && ny % 2 == 0;
    }
    EXPECT_EQ(DensePropagator(h, 4).is_real(), even_y);
    if (even_y) EXPECT_LE(m.imag().cwiseAbs().maxCoeff(), 0.0);
  }
  // Nuclei in the x-z plane have A_zy = 0, so the secular Hamiltonian is real.
  SpinLayout l = build_chain(3, 0.2, 1.0, Vec3(1, 0, 0.3), 0.05);
  EXPECT_TRUE(DensePropagator(build_secular_hamiltonian(l, compute_couplings(l)), 4).is_real());
}
