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

#include "nvlayer/errors.h"
#include "nvlayer/sequences/axy.h"
#include "nvlayer/sequences/executor.h"
#include "nvlayer/sequences/protocols.h"
#include "nvlayer/util/thread_pool.h"
#include "test_util.h"

using namespace nvlayer;

namespace {

// f_k = 2 int_0^1 F(x) cos(k pi x) dx for the block-antiperiodic modulation F, by midpoint rule.
double integrated_harmonic(double x1, double x2, int k) {
  const double xs[5] = {x1, x2, 0.5, 1.0 - x2, 1.0 - x1};
  const int n = 2000000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    int flips = 0;
    for (double p : xs) flips += x > p;
    acc += ((flips & 1) ? -1.0 : 1.0) * std::cos(k * constants::kPi * x);
  }
  return 2.0 * acc / n;
}

SpinSystem single_nucleus(const Vec3& r, double field_T) {
  SpinLayout l;
  l.nuclear_positions = {r};
  l.field_magnitude = field_T;
  return SpinSystem::from_layout(l);
}

}  // namespace

TEST(axy, harmonics_match_integrated_modulation) {
  for (auto [x1, x2] : {std::pair{0.10966, 0.29436}, std::pair{0.05, 0.4}, std::pair{0.2, 0.21}}) {
    for (int k = 1; k <= 5; ++k) {
      EXPECT_NEAR(axy_harmonic(x1, x2, k), integrated_harmonic(x1, x2, k), 2e-6) << k;
    }
  }
  EXPECT_NEAR(axy_harmonic(0.3, 0.3, 1), 4.0 / constants::kPi, 1e-15);
  EXPECT_NEAR(axy_harmonic(0.1, 0.3, 2), 0.0, 1e-15);
  EXPECT_THROW(axy_harmonic(0.1, 0.2, 0), DomainError);
}

TEST(axy, timing_solution) {
  const AxyTiming t = solve_axy_timing({0.1, 0.0, 0.0, 0.0});
  EXPECT_NEAR(axy_harmonic(t.x1, t.x2, 1), 0.1, 1e-10);
  EXPECT_NEAR(axy_harmonic(t.x1, t.x2, 3), 0.0, 1e-10);
  EXPECT_NEAR(t.x1, 0.10966, 5e-5);
  EXPECT_NEAR(t.x2, 0.29436, 5e-5);
  const AxyTiming u = solve_axy_timing({0.5, 0.0, 0.2, 0.0});
  EXPECT_NEAR(axy_harmonic(u.x1, u.x2, 1), 0.5, 1e-10);
  EXPECT_NEAR(axy_harmonic(u.x1, u.x2, 3), 0.2, 1e-10);
  EXPECT_LT(u.x1, u.x2);
  EXPECT_LT(u.x2, 0.5);
}

TEST(axy, infeasible_harmonics_throw) {
  EXPECT_THROW(solve_axy_timing({1.2, 0.0, 0.0, 0.0}), InfeasibleError);
  EXPECT_THROW(solve_axy_timing({0.1, 0.1, 0.0, 0.0}), InfeasibleError);
  EXPECT_THROW(solve_axy_timing({4.0 / constants::kPi, 0.0, 0.0, 0.0}), InfeasibleError);
  EXPECT_THROW(solve_axy_timing({0.0, 0.0, 0.0, 0.0}), InfeasibleError);
}

TEST(axy, schedule_shape) {
  const AxyTiming t = solve_axy_timing({0.1, 0.0, 0.0, 0.0});
  const double nu = 640e3;
  const PulseSchedule s = axy_schedule(t, nu, 16);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.count_pulses(constants::kPi), 80u);
  EXPECT_EQ(s.count_pulses(0.5 * constants::kPi), 2u);
  EXPECT_NEAR(s.total_duration(), 16.0 / (2.0 * nu), 1e-18);
  EXPECT_EQ(s.events().front().axis, Vec3::UnitY());
  EXPECT_EQ(s.events().back().axis, -Vec3::UnitY());
  // First pi pulse sits at x1 tau after the bracket.
  EXPECT_NEAR(s.events()[2].offset, t.x1 / (2.0 * nu), 1e-18);
  AxyOptions plain;
  plain.bracket = false;
  EXPECT_EQ(axy_schedule(t, nu, 8, plain).count(EventKind::kPulse), 40u);
  EXPECT_THROW(axy_schedule(t, -1.0, 8), ConfigError);
}

TEST(schedule, builder_and_validation) {
  PulseSchedule s;
  s.pulse({0}, Vec3(2, 0, 0), 1.0).free(1e-6).measure("a").reset().free(0.0).free(2e-6);
  EXPECT_EQ(s.events().size(), 5u);
  EXPECT_NEAR(s.total_duration(), 3e-6, 1e-21);
  EXPECT_EQ(s.events()[0].axis, Vec3::UnitX());
  EXPECT_EQ(s.count(EventKind::kReset), 1u);
  EXPECT_THROW(s.free(-1e-9), ConfigError);
  PulseSchedule t;
  t.free(1e-6).append(s);
  EXPECT_NEAR(t.events().back().offset, 2e-6, 1e-21);
  EXPECT_NO_THROW(t.validate());
  EXPECT_FALSE(t.describe().empty());
  EXPECT_NEAR(phase_axis(0.5 * constants::kPi).y(), 1.0, 1e-15);
}

TEST(axy_spectrum, truncated_matches_dense_two_nuclei) {
  // With two nuclei the truncated basis is complete, so only integrator error remains.
  SpinLayout l;
  l.nuclear_positions = {Vec3(0.5, 0, 0.8), Vec3(-0.3, 0.4, 0.9)};
  l.field_magnitude = 0.06;
  const SpinSystem sys = SpinSystem::from_layout(l);
  const std::vector<double> f = {610e3, 630e3, 642e3, 650e3, 670e3};
  AxySpectrumOptions opt;
  opt.n_reps = 2;
  const Spectrum tr = run_axy_spectrum(sys, f, opt);
  opt.engine = EngineKind::kDense;
  const Spectrum de = run_axy_spectrum(sys, f, opt);
  EXPECT_EQ(tr.basis_size, 64u);
  EXPECT_LE(oracle::max_abs_diff(tr.signal, de.signal), 1e-8);
  // Lane batching does not change the numbers beyond rounding.
  opt.engine = EngineKind::kTruncated;
  opt.lane_batch = 1;
  EXPECT_LE(oracle::max_abs_diff(run_axy_spectrum(sys, f, opt).signal, tr.signal), 1e-10);
  ThreadPool pool(3);
  opt.engine = EngineKind::kDense;
  opt.pool = &pool;
  EXPECT_EQ(run_axy_spectrum(sys, f, opt).signal, de.signal);
}

TEST(axy_spectrum, uncoupled_nv_returns_to_initial_state) {
  SpinSystem sys = single_nucleus(Vec3(0, 0, 1.0), 0.06);
  sys.hamiltonian.include_hyperfine = false;
  AxySpectrumOptions opt;
  opt.n_reps = 1;
  const Spectrum s = run_axy_spectrum(sys, {500e3, 640e3}, opt);
  for (double v : s.signal) EXPECT_NEAR(std::abs(v), 1.0, 1e-9);
  EXPECT_THROW(run_axy_spectrum(sys, {-1.0}, opt), ConfigError);
}

TEST(axy_spectrum, dip_near_shifted_larmor) {
  // A weakly coupled nucleus resonates where nu matches its precession frequency.
  const SpinSystem sys = single_nucleus(Vec3(0.6, 0, 0.8), 0.06);
  AxySpectrumOptions opt;
  opt.n_reps = 8;
  opt.engine = EngineKind::kDense;
  const double nu_l = sys.couplings.larmor / constants::kTwoPi;
  const Spectrum s = run_axy_spectrum(sys, {nu_l - 60e3, nu_l, nu_l + 60e3}, opt);
  EXPECT_LT(s.signal[1], s.signal[0] - 1e-3);
  EXPECT_LT(s.signal[1], s.signal[2] - 1e-3);
}

TEST(nuclear_sequences, ramsey_closed_form) {
  const SpinSystem sys = single_nucleus(Vec3(0, 0, 1), 0.06);
  const double delta = constants::kTwoPi * 3e3;
  std::vector<double> t;
  for (int k = 0; k <= 20; ++k) t.push_back(k * 25e-6);
  NuclearSequenceOptions opt;
  opt.detunings = {delta};
  const TimeTrace dense = run_ramsey(sys, t, opt);
  opt.readout_sign = -1;
  const TimeTrace flipped = run_ramsey(sys, t, opt);
  opt.readout_sign = +1;
  opt.engine = EngineKind::kTruncated;
  const TimeTrace trunc = run_ramsey(sys, t, opt);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(dense.column("mean_z")[k], -std::cos(delta * t[k]), 1e-12);
    EXPECT_NEAR(flipped.column("mean_z")[k], std::cos(delta * t[k]), 1e-12);
    EXPECT_NEAR(trunc.column("mean_z")[k], -std::cos(delta * t[k]), 1e-8);
  }
  EXPECT_THROW(dense.column("nope"), QueryError);
}

TEST(nuclear_sequences, ramsey_dephasing_envelope) {
  const SpinSystem sys = single_nucleus(Vec3(0, 0, 1), 0.06);
  DephasingModel d;
  d.T2_s = 100e-6;
  d.n_samples = 4000;
  d.record_draws = true;
  NuclearSequenceOptions opt;
  opt.dephasing = d;
  const std::vector<double> t = {0.0, 50e-6, 100e-6, 150e-6};
  const TimeTrace tr = run_ramsey(sys, t, opt);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(-tr.column("mean_z")[k], d.envelope(t[k]), 4.0 / std::sqrt(4000.0));
  }
  EXPECT_TRUE(tr.has_column("detuning_path0_rad_s"));
  opt.engine = EngineKind::kTruncated;
  EXPECT_THROW(run_ramsey(sys, t, opt), ConfigError);
}

TEST(nuclear_sequences, hahn_refocuses_static_detuning) {
  SpinLayout l = build_chain(3, 0.5, 1.0, Vec3(1, 0, 0), 0.06);
  SpinSystem sys = SpinSystem::from_layout(l);
  sys.hamiltonian.include_dipolar = false;
  std::vector<double> t;
  for (int k = 0; k <= 10; ++k) t.push_back(k * 40e-6);
  NuclearSequenceOptions opt;
  const TimeTrace ref = run_hahn(sys, t, opt);
  opt.detunings = {constants::kTwoPi * 3e3, -constants::kTwoPi * 1.1e3, constants::kTwoPi * 7e2};
  const TimeTrace det = run_hahn(sys, t, opt);
  EXPECT_LE(oracle::max_abs_diff(ref.column("mean_z"), det.column("mean_z")), 1e-8);
  // The echo ends on +y, which the readout maps to +z.
  for (double v : det.column("mean_z")) EXPECT_NEAR(std::abs(v), 1.0, 1e-8);
}

TEST(nuclear_sequences, wahuha_suppresses_dipolar_dephasing) {
  GridSpec g;
  g.nx = 2;
  g.ny = 2;
  g.spacing_nm = 0.154;
  g.field_T = 0.06;
  const SpinSystem sys = SpinSystem::from_layout(build_layer_grid(g));
  NuclearSequenceOptions opt;
  const TimeTrace w = run_wahuha(sys, 4e-6, 30, opt);
  EXPECT_EQ(w.axis.size(), 31u);
  EXPECT_NEAR(w.axis.back(), 30 * 24e-6, 1e-15);
  EXPECT_NEAR(w.column("time_scaled_s").back(), w.axis.back() / std::sqrt(3.0), 1e-18);
  const TimeTrace r = run_ramsey(sys, w.axis, opt);
  // Free evolution loses more coherence than the decoupled one over the same window.
  double wmin = 1.0, rmin = 1.0;
  for (double v : w.column("mean_z")) wmin = std::min(wmin, std::abs(v));
  for (double v : r.column("mean_z")) rmin = std::min(rmin, std::abs(v));
  EXPECT_GT(wmin, rmin);
  EXPECT_THROW(run_wahuha(sys, 0.0, 3, opt), ConfigError);
}

TEST(nuclear_sequences, one_over_e_time) {
  std::vector<double> t, s;
  for (int k = 0; k <= 40; ++k) {
    t.push_back(0.1 * k);
    s.push_back(-2.0 * std::exp(-t.back()));
  }
  EXPECT_NEAR(*one_over_e_time(t, s), 1.0, 2e-3);
  EXPECT_FALSE(one_over_e_time({0.0, 1.0}, {1.0, 0.9}).has_value());
  EXPECT_THROW(one_over_e_time({0.0}, {}), ConfigError);
}

TEST(novel, decoupled_nv_never_flips) {
  SpinLayout l = build_chain(2, 0.154, 1.0, Vec3(1, 0, 0), 0.06);
  SpinSystem sys = SpinSystem::from_layout(l);
  sys.hamiltonian.include_hyperfine = false;
  NovelParams p;
  p.repetitions = 5;
  const NovelResult r = run_novel(sys, p);
  for (double v : r.up.flip_probability) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : r.down.flip_probability) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : r.up.layer_polarization) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(novel, matched_drive_polarizes_single_nucleus) {
  const SpinSystem sys = single_nucleus(Vec3(0.5, 0, 0.8), 0.06);
  NovelParams p;
  p.repetitions = 30;
  p.drive = DriveAxis::kX;
  const NovelResult r = run_novel(sys, p);
  ASSERT_EQ(r.up.layer_polarization.size(), 30u);
  EXPECT_GT(std::abs(r.up.layer_polarization.back()), 0.1);
  EXPECT_LT(r.up.layer_polarization.back() * r.down.layer_polarization.back(), 0.0);
  // Probabilities stay in [0, 1] and trace is kept.
  for (double v : r.up.flip_probability) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
  NovelParams bad = p;
  bad.repetitions = 0;
  EXPECT_THROW(run_novel(sys, bad), ConfigError);
}

TEST(novel, readout_identities) {
  const std::vector<double> c = {0.1, 0.2, 0.3};
  EXPECT_NEAR(novel_readout(c, c, 0.4, 1.0), 0.0, 1e-15);
  // Down curve at the bottom of the Rabi range reads -1/2.
  const std::vector<double> lo = {0.06, 0.12, 0.18};
  EXPECT_NEAR(novel_readout(lo, c, 0.2, 0.8), -0.5, 1e-12);
  EXPECT_THROW(novel_readout(c, {}, 0.4, 1.0), ReadoutError);
  EXPECT_THROW(novel_readout(c, c, 0.0, 1.0), ReadoutError);
  EXPECT_THROW(novel_readout(c, {0.0, 0.0}, 0.4, 1.0), ReadoutError);
}

TEST(blockade, uniform_coupling_and_strong_nucleus) {
  SpinSystem sys = SpinSystem::from_layout(build_chain(4, 0.154, 1.0, Vec3(1, 0, 0), 0.06));
  set_uniform_nearest_neighbor(sys, 1000.0);
  const auto& J = sys.couplings.nuclear_dipolar;
  EXPECT_EQ(J(0, 1), 1000.0);
  EXPECT_EQ(J(2, 3), 1000.0);
  EXPECT_EQ(J(0, 2), 0.0);
  const Hyperfine a{2e6, 0.0, 1e6};
  add_strong_nucleus(sys, Vec3(-0.154, 0, 1.0), a, 500.0, 0);
  ASSERT_EQ(sys.num_nuclei(), 5u);
  EXPECT_EQ(sys.couplings.nuclear_dipolar(4, 0), 500.0);
  EXPECT_EQ(sys.couplings.nuclear_dipolar(4, 1), 0.0);
  EXPECT_EQ(sys.couplings.hyperfine[4].zx, 2e6);
  EXPECT_THROW(add_strong_nucleus(sys, Vec3(0, 0, 3), a, 1.0, 9), GeometryError);
  EXPECT_THROW(add_strong_nucleus(sys, Vec3(-0.154, 0, 1.0), a, 1.0, 0), GeometryError);
}

TEST(dtc, pi_pulses_without_interactions_alternate) {
  SpinSystem sys = SpinSystem::from_layout(build_chain(3, 0.3, 1.0, Vec3(1, 0, 0), 0.06));
  sys.hamiltonian.include_dipolar = false;
  for (bool finite : {false, true}) {
    DtcParams p;
    p.theta = constants::kPi;
    p.tau_s = 20e-6;
    p.n_cycles = 6;
    p.finite_pulse = finite;
    const TimeTrace tr = run_dtc(sys, p);
    const auto& z = tr.column("mean_z");
    ASSERT_EQ(z.size(), 6u);
    for (std::size_t c = 0; c < z.size(); ++c) EXPECT_NEAR(z[c], c % 2 ? 1.0 : -1.0, 1e-10);
    const double tp = finite ? constants::kPi / p.rabi : 0.0;
    EXPECT_NEAR(tr.column("time_s")[2], 3 * (2 * p.tau_s + tp), 1e-15);
  }
}

TEST(dtc, rejects_bad_parameters) {
  const SpinSystem sys = SpinSystem::from_layout(build_chain(2, 0.3, 1.0, Vec3(1, 0, 0), 0.06));
  DtcParams p;
  p.n_cycles = 0;
  EXPECT_THROW(run_dtc(sys, p), ConfigError);
  p.n_cycles = 3;
  p.tau_s = -1.0;
  EXPECT_THROW(run_dtc(sys, p), ConfigError);
}

TEST(sites, shift_round_trip) {
  const HamiltonianTerms h = oracle::random_hamiltonian(3, 10, 2, 1.0, 5);
  EXPECT_EQ(shift_sites(shift_sites(h, 2, 5), -2, 3), h);
  HamiltonianTerms::Builder b(2);
  b.add(PauliString::single(0, Axis::Z), 1.0);
  EXPECT_THROW(shift_sites(b.build(), -1, 2), ConfigError);
}
