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

#include "nvlayer/sequences/protocols.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "nvlayer/dense/dense_engine.h"
#include "nvlayer/errors.h"
#include "nvlayer/pauli/engine.h"
#include "nvlayer/pauli/table_cache.h"
#include "nvlayer/sequences/executor.h"
#include "nvlayer/util/thread_pool.h"

namespace nvlayer {

namespace {

constexpr double kPi = constants::kPi;

std::vector<std::uint32_t> site_range(std::uint32_t first, std::size_t count) {
  std::vector<std::uint32_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = first + static_cast<std::uint32_t>(i);
  return s;
}

}  // namespace

std::string engine_name(EngineKind e) { return e == EngineKind::kDense ? "dense" : "truncated"; }

EngineKind parse_engine(const std::string& name) {
  if (name == "dense") return EngineKind::kDense;
  if (name == "truncated") return EngineKind::kTruncated;
  throw ConfigError("unknown engine '" + name + "' (expected truncated or dense)");
}

SpinSystem SpinSystem::from_layout(SpinLayout layout, HamiltonianOptions opt) {
  SpinSystem s;
  s.couplings = compute_couplings(layout);
  s.layout = std::move(layout);
  s.hamiltonian = opt;
  return s;
}

void set_uniform_nearest_neighbor(SpinSystem& system, double j, double rel_tol) {
  const auto& pos = system.layout.nuclear_positions;
  const std::size_t n = pos.size();
  double min_d = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) min_d = std::min(min_d, (pos[a] - pos[b]).norm());
  }
  Eigen::MatrixXd& J = system.couplings.nuclear_dipolar;
  J.setZero(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if ((pos[a] - pos[b]).norm() <= min_d * (1.0 + rel_tol)) J(a, b) = J(b, a) = j;
    }
  }
}

void add_strong_nucleus(SpinSystem& system, const Vec3& position_nm, const Hyperfine& a, double j,
                        std::size_t partner) {
  const std::size_t n = system.num_nuclei();
  if (partner >= n) throw GeometryError("strong nucleus partner out of range");
  system.layout.nuclear_positions.push_back(position_nm);
  system.layout.validate();
  system.couplings.hyperfine.push_back(a);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + 1, n + 1);
  J.topLeftCorner(n, n) = system.couplings.nuclear_dipolar;
  J(n, partner) = J(partner, n) = j;
  system.couplings.nuclear_dipolar = J;
}

void TimeTrace::add_column(std::string name, std::vector<double> values) {
  if (values.size() != axis.size()) throw ConfigError("column '" + name + "' length mismatch");
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

bool TimeTrace::has_column(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& TimeTrace::column(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return columns[k];
  }
  throw QueryError("trace has no column '" + name + "'");
}

HamiltonianTerms shift_sites(const HamiltonianTerms& h, int offset, std::size_t num_sites) {
  HamiltonianTerms::Builder b(num_sites);
  for (const auto& t : h.terms()) {
    PauliString p;
    for (const auto& f : t.product) {
      const long s = static_cast<long>(f.site) + offset;
      if (s < 0) throw ConfigError("site shift moves a term below site 0");
      p.push_back_unchecked(static_cast<std::uint32_t>(s), f.axis);
    }
    b.add(p, t.coefficient);
  }
  return b.build(0.0);
}

// ---------------------------------------------------------------------------------------------
// AXY

Spectrum run_axy_spectrum(const SpinSystem& system, const std::vector<double>& frequencies_hz,
                          const AxySpectrumOptions& opt) {
  for (double f : frequencies_hz) {
    if (!(f > 0.0)) throw ConfigError("AXY frequencies must be positive");
  }
  Spectrum out;
  out.timing = solve_axy_timing(opt.f);
  out.frequency_hz = frequencies_hz;
  for (double f : frequencies_hz) out.tau_s.push_back(0.5 / f);
  out.signal.assign(frequencies_hz.size(), 0.0);
  const std::size_t n_blocks = opt.n_blocks ? opt.n_blocks : 8 * opt.n_reps;
  const std::size_t n = system.num_nuclei();
  const HamiltonianTerms h =
      build_secular_hamiltonian(system.layout, system.couplings, system.hamiltonian);
  const std::vector<Observable> obs{Observable::pauli_string("z_nv", PauliString::single(0, Axis::Z))};

  std::vector<Vec3> bloch(n + 1, Vec3::Zero());
  bloch[0] = Vec3::UnitZ();

  // No nuclei: the truncated basis is undefined, and the answer is trivial anyway.
  const EngineKind engine = n == 0 ? EngineKind::kDense : opt.engine;
  out.engine = engine;
  if (frequencies_hz.empty()) return out;

  if (engine == EngineKind::kTruncated) {
    const TruncatedBasis basis = TruncatedBasis::enumerate(n, opt.truncation, &system.layout);
    const ActionTable table =
        opt.cache ? opt.cache->load_or_build(h, basis, opt.table_layout, opt.pool)
                  : ActionTable::build(h, basis, opt.table_layout, opt.pool);
    out.stats = table.stats();
    out.basis_size = basis.size();
    EngineOptions eo;
    eo.kernel = opt.kernel;
    eo.taylor_order = opt.taylor_order;
    eo.step_bound = opt.step_bound;
    eo.pool = opt.pool;
    const PauliEngine eng(basis, table, eo);
    const std::size_t batch = std::max<std::size_t>(1, opt.lane_batch);
    for (std::size_t b0 = 0; b0 < frequencies_hz.size(); b0 += batch) {
      const std::size_t b1 = std::min(frequencies_hz.size(), b0 + batch);
      // Rescaled lanes: one schedule at the lowest frequency, lane b runs alpha_b H with
      // alpha_b = nu_ref / nu_b, which is the same as evolving H for the shorter times.
      const double nu_ref = *std::min_element(frequencies_hz.begin() + b0, frequencies_hz.begin() + b1);
      const std::size_t lanes = (b1 - b0 + 3) / 4 * 4;
      std::vector<double> alpha(lanes);
      for (std::size_t k = 0; k < lanes; ++k) {
        alpha[k] = nu_ref / frequencies_hz[std::min(b0 + k, b1 - 1)];
      }
      TruncatedState st = product_state(basis, bloch, lanes);
      st.set_alpha(alpha);
      TruncatedBackend backend({&eng}, std::move(st));
      PulseSchedule s = axy_schedule(out.timing, nu_ref, n_blocks);
      s.measure("end");
      const auto rec = run_schedule(backend, s, obs);
      for (std::size_t k = b0; k < b1; ++k) out.signal[k] = rec.back().values[0][k - b0];
    }
    return out;
  }

  auto prop = std::make_shared<const DensePropagator>(h, n + 1, opt.max_dense_spins);
  const CMat rho0 = product_density(bloch);
  const auto one = [&](std::size_t k) {
    DenseBackend backend(n + 1, {prop}, rho0);
    backend.set_unitary_cache(true);
    PulseSchedule s = axy_schedule(out.timing, frequencies_hz[k], n_blocks);
    s.measure("end");
    out.signal[k] = run_schedule(backend, s, obs).back().values[0][0];
  };
  if (opt.pool) {
    opt.pool->parallel_for(frequencies_hz.size(), one);
  } else {
    for (std::size_t k = 0; k < frequencies_hz.size(); ++k) one(k);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// NOVEL

NovelCurve run_novel_curve(const SpinSystem& system, const NovelParams& p,
                           const std::vector<Vec3>& nuclear_bloch,
                           const std::vector<std::size_t>& layer_sites) {
  const std::size_t n = system.num_nuclei();
  if (p.repetitions < 1) throw ConfigError("NOVEL needs at least one repetition");
  if (!(p.spinlock_s > 0.0)) throw ConfigError("spin-lock duration must be positive");
  if (p.wait_s < 0.0) throw ConfigError("waiting time must be nonnegative");
  if (p.sign != 1 && p.sign != -1) throw ConfigError("NOVEL pulse sign must be +1 or -1");
  if (nuclear_bloch.size() != n) throw ConfigError("one Bloch vector per nucleus required");
  for (std::size_t s : layer_sites) {
    if (s >= n) throw ConfigError("layer site out of range");
  }
  check_dense_capacity(n + 1, p.max_dense_spins);

  const double omega = p.omega > 0.0 ? p.omega : system.couplings.larmor;
  const HamiltonianTerms h_lock =
      build_novel_hamiltonian(system.layout, system.couplings, omega, system.hamiltonian, p.drive);
  HamiltonianOptions wait_opt = system.hamiltonian;
  wait_opt.include_hyperfine = false;  // S_z = 0 with the NV in m_s = 0
  const HamiltonianTerms h_wait = shift_sites(
      build_secular_hamiltonian(system.layout, system.couplings, wait_opt), -1, std::max<std::size_t>(n, 1));

  // The first pulse takes the NV from +z onto the lock axis (antiparallel to the drive for
  // sign +1); the second pulse is its inverse.
  const Vec3 pulse_axis = p.drive == DriveAxis::kY ? Vec3(Vec3::UnitX()) : Vec3(-Vec3::UnitY());
  const Eigen::Matrix2cd p1 = rotation_unitary(pulse_axis, p.sign * 0.5 * kPi);
  const Eigen::Matrix2cd p2 = p1.adjoint();

  const Eigen::Index d = Eigen::Index{1} << n;
  const Eigen::Index D = 2 * d;
  const CMat u_lock = DensePropagator(h_lock, n + 1, p.max_dense_spins).unitary(p.spinlock_s);
  // Block (a, b) of U_lock: NV a <- b on the low bit; nuclear index in the remaining bits.
  const auto block = [&](int a, int b) {
    using Strided = Eigen::Map<const CMat, 0, Eigen::Stride<Eigen::Dynamic, 2>>;
    return CMat(Strided(u_lock.data() + a + b * D, d, d, Eigen::Stride<Eigen::Dynamic, 2>(2 * D, 2)));
  };
  const CMat l00 = block(0, 0), l01 = block(0, 1), l10 = block(1, 0), l11 = block(1, 1);
  CMat w[2];
  for (int s = 0; s < 2; ++s) {
    // W_s = sum_ab P2(s,a) L_ab P1(b,0).
    w[s] = p2(s, 0) * (l00 * p1(0, 0) + l01 * p1(1, 0)) + p2(s, 1) * (l10 * p1(0, 0) + l11 * p1(1, 0));
  }
  CMat k_ops[2];
  if (n > 0 && p.wait_s > 0.0) {
    const CMat u_wait = DensePropagator(h_wait, n, p.max_dense_spins).unitary(p.wait_s);
    for (int s = 0; s < 2; ++s) k_ops[s] = u_wait * w[s];
  } else {
    k_ops[0] = w[0];
    k_ops[1] = w[1];
  }

  std::vector<std::size_t> layer = layer_sites;
  if (layer.empty()) {
    for (std::size_t i = 0; i < n; ++i) layer.push_back(i);
  }
  const auto site_z = [&](const CMat& rho, std::size_t i) {
    double z = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      z += (((k >> i) & 1) ? -1.0 : 1.0) * rho(k, k).real();
    }
    return z;
  };

  CMat rho = n > 0 ? product_density(nuclear_bloch) : CMat::Identity(1, 1);
  NovelCurve curve;
  CMat tmp(d, d), r1(d, d);
  for (std::size_t m = 0; m < p.repetitions; ++m) {
    tmp.noalias() = k_ops[1] * rho;
    r1.noalias() = tmp * k_ops[1].adjoint();
    tmp.noalias() = k_ops[0] * rho;
    rho.noalias() = tmp * k_ops[0].adjoint();
    rho += r1;
    curve.flip_probability.push_back(std::max(0.0, r1.trace().real()));
    double acc = 0.0;
    for (std::size_t i : layer) acc += site_z(rho, i);
    curve.layer_polarization.push_back(layer.empty() ? 0.0 : acc / static_cast<double>(layer.size()));
  }
  for (std::size_t i = 0; i < n; ++i) curve.final_site_polarization.push_back(site_z(rho, i));
  return curve;
}

NovelResult run_novel(const SpinSystem& system, NovelParams p,
                      const std::vector<std::size_t>& layer_sites) {
  const std::vector<Vec3> mixed(system.num_nuclei(), Vec3::Zero());
  NovelResult r;
  p.sign = +1;
  r.up = run_novel_curve(system, p, mixed, layer_sites);
  p.sign = -1;
  r.down = run_novel_curve(system, p, mixed, layer_sites);
  return r;
}

double novel_readout(const std::vector<double>& curve_down, const std::vector<double>& curve_up,
                     double rabi_amplitude, double rabi_offset) {
  if (curve_up.empty()) throw ReadoutError("empty up curve");
  if (!(rabi_amplitude > 0.0)) throw ReadoutError("Rabi amplitude must be positive");
  double up = 0.0, down = 0.0;
  for (double v : curve_up) up += v;
  for (double v : curve_down) down += v;
  if (up == 0.0) throw ReadoutError("up curve sums to zero");
  const double rn = down / up;
  return (rn - (rabi_offset - rabi_amplitude)) / (2.0 * rabi_amplitude) - 0.5;
}

// ---------------------------------------------------------------------------------------------
// Nuclear sequences

namespace {

// Owns whichever engine the options select and hands out fresh backends.
class NuclearRig {
 public:
  NuclearRig(const SpinSystem& system, const NuclearSequenceOptions& opt) : opt_(opt) {
    n_ = system.num_nuclei();
    if (n_ == 0) throw ConfigError("nuclear sequences need at least one nucleus");
    if (!opt.detunings.empty() && opt.detunings.size() != n_) {
      throw ConfigError("one detuning per nucleus required");
    }
    HamiltonianTerms h = build_nuclear_frame_hamiltonian(system.layout, system.couplings,
                                                         system.hamiltonian);
    if (!opt.detunings.empty()) h = h.plus(detuning_terms(n_, site_range(0, n_), opt.detunings));
    if (opt.engine == EngineKind::kTruncated) {
      if (opt.dephasing && opt.dephasing->active()) {
        throw ConfigError("dephasing averages density operators and needs the dense engine");
      }
      sites_ = site_range(1, n_);
      basis_ = std::make_unique<TruncatedBasis>(TruncatedBasis::enumerate(n_, opt.truncation));
      table_ = std::make_unique<ActionTable>(
          ActionTable::build(shift_sites(h, 1, n_ + 1), *basis_, TableLayout::kByTarget, opt.pool));
      EngineOptions eo;
      eo.kernel = opt.kernel;
      eo.taylor_order = opt.taylor_order;
      eo.step_bound = opt.step_bound;
      eo.pool = opt.pool;
      engine_ = std::make_unique<PauliEngine>(*basis_, *table_, eo);
    } else {
      sites_ = site_range(0, n_);
      h_ = h;
      prop_ = std::make_shared<const DensePropagator>(h, n_, opt.max_dense_spins);
    }
  }

  const std::vector<std::uint32_t>& sites() const { return sites_; }

  std::unique_ptr<Backend> fresh() const {
    if (engine_) {
      std::vector<Vec3> bloch(n_ + 1, Vec3::UnitZ());
      bloch[0] = Vec3::UnitZ();
      return std::make_unique<TruncatedBackend>(std::vector<const PauliEngine*>{engine_.get()},
                                                product_state(*basis_, bloch));
    }
    const std::vector<Vec3> bloch(n_, Vec3::UnitZ());
    std::unique_ptr<DenseBackend> b;
    if (opt_.dephasing && opt_.dephasing->active()) {
      b = std::make_unique<DenseBackend>(n_, std::vector<std::shared_ptr<const DensePropagator>>{prop_},
                                         product_density(bloch));
      b->enable_dephasing(*opt_.dephasing, sites_, {h_}, opt_.pool);
    } else {
      b = std::make_unique<DenseBackend>(n_, std::vector<std::shared_ptr<const DensePropagator>>{prop_},
                                         product_pure(bloch));
    }
    return b;
  }

  Observable observable() const { return Observable::mean_z("mean_z", sites_); }

  // Readout pulse, measurement, and the inverse pulse so the run can continue.
  void probe(PulseSchedule& s, const std::string& label) const {
    s.pulse(sites_, Vec3::UnitX(), opt_.readout_sign * 0.5 * kPi);
    s.measure(label);
    s.pulse(sites_, Vec3::UnitX(), -opt_.readout_sign * 0.5 * kPi);
  }

 private:
  NuclearSequenceOptions opt_;
  std::size_t n_ = 0;
  std::vector<std::uint32_t> sites_;
  std::unique_ptr<TruncatedBasis> basis_;
  std::unique_ptr<ActionTable> table_;
  std::unique_ptr<PauliEngine> engine_;
  HamiltonianTerms h_;
  std::shared_ptr<const DensePropagator> prop_;
};

void check_times(const std::vector<double>& t) {
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < 0.0 || (k > 0 && t[k] < t[k - 1])) {
      throw ConfigError("sample times must be nonnegative and nondecreasing");
    }
  }
}

std::vector<double> first_values(const std::vector<MeasurementRecord>& rec) {
  std::vector<double> v;
  v.reserve(rec.size());
  for (const auto& r : rec) v.push_back(r.values[0][0]);
  return v;
}

// Debug column: the first site's detuning on sample path 0 in the segment before each record.
bool wants_draws(const std::optional<DephasingModel>& d) {
  return d && d->active() && d->record_draws;
}

double first_draw(const MeasurementRecord& r) {
  return r.detunings.empty() ? std::nan("") : r.detunings.front();
}

std::vector<double> draws_column(const std::vector<MeasurementRecord>& rec) {
  std::vector<double> v;
  v.reserve(rec.size());
  for (const auto& r : rec) v.push_back(first_draw(r));
  return v;
}

}  // namespace

TimeTrace run_ramsey(const SpinSystem& system, const std::vector<double>& times_s,
                     const NuclearSequenceOptions& opt) {
  check_times(times_s);
  const NuclearRig rig(system, opt);
  if (opt.dephasing && opt.dephasing->active()) {
    // Each delay is one free-evolution segment with its own draw, so every sample time runs
    // from a fresh state instead of continuing the previous one.
    std::vector<double> v, draws;
    for (double t : times_s) {
      PulseSchedule s;
      s.pulse(rig.sites(), Vec3::UnitX(), 0.5 * kPi);
      s.free(t);
      rig.probe(s, "ramsey");
      auto backend = rig.fresh();
      const auto rec = run_schedule(*backend, s, {rig.observable()});
      v.push_back(rec.back().values[0][0]);
      draws.push_back(first_draw(rec.back()));
    }
    TimeTrace tr;
    tr.axis = times_s;
    tr.add_column("mean_z", std::move(v));
    if (opt.dephasing->record_draws) tr.add_column("detuning_path0_rad_s", std::move(draws));
    return tr;
  }
  PulseSchedule s;
  s.pulse(rig.sites(), Vec3::UnitX(), 0.5 * kPi);
  double prev = 0.0;
  for (double t : times_s) {
    s.free(t - prev);
    prev = t;
    rig.probe(s, "ramsey");
  }
  auto backend = rig.fresh();
  const auto rec = run_schedule(*backend, s, {rig.observable()});
  TimeTrace tr;
  tr.axis = times_s;
  tr.add_column("mean_z", first_values(rec));
  if (wants_draws(opt.dephasing)) tr.add_column("detuning_path0_rad_s", draws_column(rec));
  return tr;
}

TimeTrace run_hahn(const SpinSystem& system, const std::vector<double>& times_s,
                   const NuclearSequenceOptions& opt) {
  check_times(times_s);
  const NuclearRig rig(system, opt);
  std::vector<double> v, draws;
  for (double t : times_s) {
    PulseSchedule s;
    s.pulse(rig.sites(), Vec3::UnitX(), 0.5 * kPi);
    s.free(0.5 * t);
    s.pulse(rig.sites(), Vec3::UnitX(), kPi);
    s.free(0.5 * t);
    rig.probe(s, "hahn");
    auto backend = rig.fresh();
    const auto rec = run_schedule(*backend, s, {rig.observable()});
    v.push_back(rec.back().values[0][0]);
    draws.push_back(first_draw(rec.back()));
  }
  TimeTrace tr;
  tr.axis = times_s;
  tr.add_column("mean_z", std::move(v));
  if (wants_draws(opt.dephasing)) tr.add_column("detuning_path0_rad_s", std::move(draws));
  return tr;
}

TimeTrace run_wahuha(const SpinSystem& system, double tau_s, std::size_t n_cycles,
                     const NuclearSequenceOptions& opt) {
  if (!(tau_s > 0.0)) throw ConfigError("WAHUHA pulse spacing must be positive");
  const NuclearRig rig(system, opt);
  const auto& q = rig.sites();
  const double h = 0.5 * kPi;
  PulseSchedule s;
  s.pulse(q, Vec3::UnitX(), h);
  TimeTrace tr;
  tr.axis.push_back(0.0);
  rig.probe(s, "wahuha");
  for (std::size_t c = 1; c <= n_cycles; ++c) {
    s.free(tau_s).pulse(q, Vec3::UnitX(), h);
    s.free(tau_s).pulse(q, -Vec3::UnitY(), h);
    s.free(2.0 * tau_s).pulse(q, Vec3::UnitY(), h);
    s.free(tau_s).pulse(q, -Vec3::UnitX(), h);
    s.free(tau_s);
    rig.probe(s, "wahuha");
    tr.axis.push_back(6.0 * tau_s * static_cast<double>(c));
  }
  auto backend = rig.fresh();
  tr.add_column("mean_z", first_values(run_schedule(*backend, s, {rig.observable()})));
  std::vector<double> scaled;
  for (double t : tr.axis) scaled.push_back(t / std::sqrt(3.0));
  tr.add_column("time_scaled_s", std::move(scaled));
  return tr;
}

std::optional<double> one_over_e_time(const std::vector<double>& t, const std::vector<double>& s) {
  if (t.size() != s.size() || t.empty()) throw ConfigError("trace axis and values differ in length");
  const double thr = std::abs(s[0]) / std::exp(1.0);
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double a = std::abs(s[k - 1]);
    const double b = std::abs(s[k]);
    if (b < thr) {
      const double f = a == b ? 0.0 : (a - thr) / (a - b);
      return t[k - 1] + f * (t[k] - t[k - 1]);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------------------------
// DTC

TimeTrace run_dtc(const SpinSystem& system, const DtcParams& p,
                  const std::optional<DephasingModel>& dephasing, ThreadPool* pool) {
  const std::size_t n = system.num_nuclei();
  if (n == 0) throw ConfigError("DTC needs at least one nucleus");
  if (p.n_cycles < 1) throw ConfigError("DTC needs at least one Floquet cycle");
  if (p.tau_s < 0.0) throw ConfigError("interaction time must be nonnegative");
  if (p.finite_pulse && !(p.rabi > 0.0)) throw ConfigError("finite pulses need a positive Rabi frequency");
  const auto sites = site_range(0, n);
  const HamiltonianTerms h_nn =
      build_nuclear_frame_hamiltonian(system.layout, system.couplings, system.hamiltonian);
  const double t_pulse = p.finite_pulse ? std::abs(p.theta) / p.rabi : 0.0;
  HamiltonianTerms h_pulse;
  if (p.finite_pulse) {
    HamiltonianTerms::Builder b(n);
    b.add_all(h_nn);
    for (auto s : sites) b.add(PauliString::single(s, Axis::X), p.theta >= 0.0 ? p.rabi : -p.rabi);
    h_pulse = b.build();
  }

  // Readout-fidelity proxy: weight each nucleus by its flip-flop strength |A_perp|^2.
  std::vector<double> weights(n, 1.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n && i < system.couplings.hyperfine.size(); ++i) {
    const auto& a = system.couplings.hyperfine[i];
    weights[i] = a.zx * a.zx + a.zy * a.zy;
    wsum += weights[i];
  }
  if (!(wsum > 0.0)) std::fill(weights.begin(), weights.end(), 1.0);
  const std::vector<Observable> obs{Observable::mean_z("mean_z", sites),
                                    Observable::weighted_z("weighted_z", sites, weights)};

  std::vector<std::shared_ptr<const DensePropagator>> props{
      std::make_shared<const DensePropagator>(h_nn, n)};
  if (p.finite_pulse) props.push_back(std::make_shared<const DensePropagator>(h_pulse, n));

  PulseSchedule s;
  for (std::size_t c = 0; c < p.n_cycles; ++c) {
    s.free(p.tau_s, 0, true);
    if (p.finite_pulse) {
      s.free(t_pulse, 1, false);
    } else {
      s.pulse(sites, Vec3::UnitX(), p.theta);
    }
    s.free(p.tau_s, 0, true);
    s.measure("cycle");
  }

  const std::vector<Vec3> up(n, Vec3::UnitZ());
  std::vector<MeasurementRecord> rec;
  if (dephasing && dephasing->active()) {
    DenseBackend b(n, props, product_density(up));
    std::vector<HamiltonianTerms> hams{h_nn};
    if (p.finite_pulse) hams.push_back(h_pulse);
    b.enable_dephasing(*dephasing, sites, hams, pool);
    rec = run_schedule(b, s, obs);
  } else {
    DenseBackend b(n, props, product_pure(up));
    b.set_unitary_cache(true);
    rec = run_schedule(b, s, obs);
  }

  TimeTrace tr;
  tr.axis_name = "cycle";
  std::vector<double> t, mz, wz;
  for (std::size_t c = 0; c < rec.size(); ++c) {
    tr.axis.push_back(static_cast<double>(c + 1));
    t.push_back(static_cast<double>(c + 1) * (2.0 * p.tau_s + t_pulse));
    mz.push_back(rec[c].values[0][0]);
    wz.push_back(rec[c].values[1][0]);
  }
  tr.add_column("time_s", std::move(t));
  tr.add_column("mean_z", std::move(mz));
  tr.add_column("weighted_z", std::move(wz));
  if (wants_draws(dephasing)) tr.add_column("detuning_path0_rad_s", draws_column(rec));
  return tr;
}

}  // namespace nvlayer
