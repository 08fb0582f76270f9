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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nvlayer/dense/dephasing.h"
#include "nvlayer/geometry/couplings.h"
#include "nvlayer/hamiltonian/builders.h"
#include "nvlayer/pauli/action_table.h"
#include "nvlayer/pauli/basis.h"
#include "nvlayer/pauli/engine.h"
#include "nvlayer/pauli/kernels.h"
#include "nvlayer/sequences/axy.h"

namespace nvlayer {

class ThreadPool;
class TableCache;

enum class EngineKind { kTruncated, kDense };
std::string engine_name(EngineKind e);
EngineKind parse_engine(const std::string& name);

/// Layout plus the couplings derived from it (or overridden by hand).
struct SpinSystem {
  SpinLayout layout;
  CouplingSet couplings;
  HamiltonianOptions hamiltonian;

  static SpinSystem from_layout(SpinLayout layout, HamiltonianOptions opt = {});
  std::size_t num_nuclei() const { return layout.num_nuclei(); }
};

/// Sampled observables on a shared axis.
/// Replaces the geometric nuclear couplings by `j` (rad/s) on nearest-neighbour pairs and zero
/// elsewhere. Pairs within `rel_tol` of the smallest spacing count as nearest neighbours.
void set_uniform_nearest_neighbor(SpinSystem& system, double j, double rel_tol = 1e-6);

/// Appends a nucleus at `position_nm` with hyperfine `a` (overriding the geometric value) and
/// nuclear coupling `j` to nucleus `partner` only (0-based over nuclei).
void add_strong_nucleus(SpinSystem& system, const Vec3& position_nm, const Hyperfine& a, double j,
                        std::size_t partner);

struct TimeTrace {
  std::string axis_name = "time_s";
  std::vector<double> axis;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  void add_column(std::string name, std::vector<double> values);
  /// Throws QueryError for an unknown column.
  const std::vector<double>& column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

// ---- AXY spectroscopy ----

struct AxySpectrumOptions {
  std::array<double, 4> f = {0.1, 0.0, 0.0, 0.0};
  // Repetitions of the eight-block AXY-8 unit. n_blocks, when nonzero, overrides it.
  std::size_t n_reps = 30;
  std::size_t n_blocks = 0;
  EngineKind engine = EngineKind::kTruncated;
  TruncationRule truncation;
  KernelChoice kernel = KernelChoice::kAuto;
  int taylor_order = EngineOptions{}.taylor_order;
  double step_bound = EngineOptions{}.step_bound;
  TableLayout table_layout = TableLayout::kByTarget;
  // Frequencies evolved together as rescaled lanes of one truncated state.
  std::size_t lane_batch = 32;
  std::size_t max_dense_spins = kDefaultMaxDenseSpins;
  ThreadPool* pool = nullptr;
  const TableCache* cache = nullptr;
};

struct Spectrum {
  std::vector<double> frequency_hz;
  std::vector<double> tau_s;   // block duration 1/(2 nu)
  std::vector<double> signal;  // <Z_NV> after the bracketed train
  EngineKind engine = EngineKind::kTruncated;
  ActionStats stats;
  std::size_t basis_size = 0;
  AxyTiming timing;
};

/// NV polarization after the AXY train for each frequency. Nuclei start fully unpolarized.
Spectrum run_axy_spectrum(const SpinSystem& system, const std::vector<double>& frequencies_hz,
                          const AxySpectrumOptions& opt = {});

// ---- NOVEL polarization transfer ----

struct NovelParams {
  double spinlock_s = 5.0e-6;
  double wait_s = 3.0e-6;
  std::size_t repetitions = 100;
  // +1 or -1: sign of the first pi/2 pulse. The second pulse undoes the first.
  int sign = +1;
  // Drive amplitude in rad/s; zero selects Hartmann-Hahn matching to the Larmor frequency.
  double omega = 0.0;
  DriveAxis drive = DriveAxis::kY;
  std::size_t max_dense_spins = kDefaultMaxDenseSpins;
};

struct NovelCurve {
  std::vector<double> flip_probability;    // p(m) = (1 - <Z_NV>)/2 before reset
  std::vector<double> layer_polarization;  // mean nuclear <sigma_z> after repetition m
  std::vector<double> final_site_polarization;
};

/// Runs M repetitions from an initial nuclear product state (one Bloch vector per nucleus).
/// `layer_sites` (nuclear indices 0..n-1) selects the sites averaged into layer_polarization;
/// empty means all.
NovelCurve run_novel_curve(const SpinSystem& system, const NovelParams& p,
                           const std::vector<Vec3>& nuclear_bloch,
                           const std::vector<std::size_t>& layer_sites = {});

struct NovelResult {
  NovelCurve up;    // first pulse sign +1
  NovelCurve down;  // first pulse sign -1
};

/// Both curves from a fully unpolarized layer.
NovelResult run_novel(const SpinSystem& system, NovelParams p,
                      const std::vector<std::size_t>& layer_sites = {});

/// Collective <I_z> from the ratio of summed flip probabilities and a nuclear Rabi fit.
/// Throws ReadoutError on an empty or zero-sum up curve, or a non-positive amplitude.
double novel_readout(const std::vector<double>& curve_down, const std::vector<double>& curve_up,
                     double rabi_amplitude, double rabi_offset);

// ---- Nuclear sequences: Ramsey, Hahn echo, WAHUHA ----

struct NuclearSequenceOptions {
  EngineKind engine = EngineKind::kDense;
  // Static detuning per nucleus (rad/s); empty means none.
  std::vector<double> detunings;
  // +1 reads out with +pi/2 about x, -1 with -pi/2.
  int readout_sign = +1;
  std::optional<DephasingModel> dephasing;
  TruncationRule truncation;
  KernelChoice kernel = KernelChoice::kAuto;
  int taylor_order = EngineOptions{}.taylor_order;
  double step_bound = EngineOptions{}.step_bound;
  std::size_t max_dense_spins = kDefaultMaxDenseSpins;
  ThreadPool* pool = nullptr;
};

/// Nuclei start polarized along +z. Columns: "mean_z" (collective <sigma_z> after readout).
TimeTrace run_ramsey(const SpinSystem& system, const std::vector<double>& times_s,
                     const NuclearSequenceOptions& opt = {});
TimeTrace run_hahn(const SpinSystem& system, const std::vector<double>& times_s,
                   const NuclearSequenceOptions& opt = {});
/// Sampled after each of n_cycles WAHUHA cycles (free times tau, tau, 2 tau, tau, tau).
/// Adds "time_scaled_s", the raw axis divided by sqrt(3).
TimeTrace run_wahuha(const SpinSystem& system, double tau_s, std::size_t n_cycles,
                     const NuclearSequenceOptions& opt = {});

/// First time |s(t)| falls below |s(0)|/e, linearly interpolated; nullopt when it never does.
std::optional<double> one_over_e_time(const std::vector<double>& t, const std::vector<double>& s);

// ---- Discrete time crystal ----

struct DtcParams {
  double theta = 1.03 * constants::kPi;
  double tau_s = 0.0;
  std::size_t n_cycles = 40;
  double rabi = constants::kTwoPi * 37.14e3;  // rad/s
  bool finite_pulse = true;
};

/// Floquet cycles U(tau) R(theta) U(tau) on the nuclei with the NV parked in m_s = 0.
/// Nuclei start polarized along +z. Axis is the cycle count N = 1..n_cycles. Columns:
/// "time_s" (shifted by the pulse length), "mean_z" and "weighted_z" (weights |A_perp|^2).
TimeTrace run_dtc(const SpinSystem& system, const DtcParams& p,
                  const std::optional<DephasingModel>& dephasing = std::nullopt,
                  ThreadPool* pool = nullptr);

/// Hamiltonian on `num_sites` sites with every term moved by `offset` sites (may be negative).
HamiltonianTerms shift_sites(const HamiltonianTerms& h, int offset,
                             std::size_t num_sites);

}  // namespace nvlayer
