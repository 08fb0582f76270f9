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

#include "nvlayer/sequences/executor.h"

#include <cmath>
#include <functional>

#include "nvlayer/errors.h"

namespace nvlayer {

Observable Observable::pauli_string(std::string name, const PauliString& p) {
  Observable o;
  o.name = std::move(name);
  o.kind = Kind::kPauli;
  o.pauli = p;
  return o;
}

Observable Observable::mean_z(std::string name, std::vector<std::uint32_t> sites) {
  Observable o;
  o.name = std::move(name);
  o.kind = Kind::kMeanZ;
  o.sites = std::move(sites);
  return o;
}

Observable Observable::weighted_z(std::string name, std::vector<std::uint32_t> sites,
                                  std::vector<double> weights) {
  if (sites.size() != weights.size()) throw ConfigError("weights must match sites");
  Observable o;
  o.name = std::move(name);
  o.kind = Kind::kWeightedZ;
  o.sites = std::move(sites);
  o.weights = std::move(weights);
  return o;
}

namespace {

template <typename F>
double reduce_observable(const Observable& obs, F&& z_of_site, F&& pauli) {
  switch (obs.kind) {
    case Observable::Kind::kPauli:
      return pauli(0);
    case Observable::Kind::kMeanZ: {
      if (obs.sites.empty()) throw QueryError("mean over an empty site set");
      double acc = 0.0;
      for (auto s : obs.sites) acc += z_of_site(s);
      return acc / static_cast<double>(obs.sites.size());
    }
    case Observable::Kind::kWeightedZ: {
      double acc = 0.0, wsum = 0.0;
      for (std::size_t k = 0; k < obs.sites.size(); ++k) {
        acc += obs.weights[k] * z_of_site(obs.sites[k]);
        wsum += std::abs(obs.weights[k]);
      }
      if (wsum == 0.0) throw QueryError("weighted observable has zero total weight");
      return acc / wsum;
    }
  }
  return 0.0;
}

}  // namespace

std::vector<MeasurementRecord> run_schedule(Backend& backend, const PulseSchedule& schedule,
                                            const std::vector<Observable>& observables) {
  schedule.validate();
  std::vector<MeasurementRecord> out;
  for (const auto& e : schedule.events()) {
    switch (e.kind) {
      case EventKind::kPulse:
        backend.pulse(e);
        break;
      case EventKind::kFree:
        backend.free(e);
        break;
      case EventKind::kReset:
        backend.reset();
        break;
      case EventKind::kMeasure: {
        MeasurementRecord m;
        m.time = e.offset;
        m.label = e.label;
        for (const auto& o : observables) m.values.push_back(backend.measure(o));
        if (const auto* d = dynamic_cast<const DenseBackend*>(&backend)) m.detunings = d->last_draws();
        out.push_back(std::move(m));
        break;
      }
    }
  }
  return out;
}

TruncatedBackend::TruncatedBackend(std::vector<const PauliEngine*> engines, TruncatedState state)
    : engines_(std::move(engines)), state_(std::move(state)) {
  if (engines_.empty()) throw ConfigError("truncated backend needs an engine");
}

void TruncatedBackend::pulse(const Event& e) {
  engines_[0]->apply_pulse(state_, e.sites, e.axis, e.angle);
}

void TruncatedBackend::free(const Event& e) {
  if (e.hamiltonian >= engines_.size()) throw ConfigError("schedule references a missing Hamiltonian");
  engines_[e.hamiltonian]->evolve(state_, e.duration);
}

void TruncatedBackend::reset() { engines_[0]->laser_reset(state_); }

std::vector<double> TruncatedBackend::measure(const Observable& obs) const {
  std::vector<double> v(state_.lanes());
  const PauliEngine& eng = *engines_[0];
  for (std::size_t b = 0; b < state_.lanes(); ++b) {
    const auto z = [&](std::uint32_t s) {
      return eng.expectation(state_, PauliString::single(s, Axis::Z), b);
    };
    const auto p = [&](std::uint32_t) { return eng.expectation(state_, obs.pauli, b); };
    v[b] = reduce_observable(obs, std::function<double(std::uint32_t)>(z),
                             std::function<double(std::uint32_t)>(p));
  }
  return v;
}

DenseBackend::DenseBackend(std::size_t n_sites,
                           std::vector<std::shared_ptr<const DensePropagator>> props, CVec psi)
    : n_sites_(n_sites), props_(std::move(props)), pure_(true), psi_(std::move(psi)) {
  if (static_cast<std::size_t>(psi_.size()) != (std::size_t{1} << n_sites)) {
    throw ConfigError("dense state dimension mismatch");
  }
}

DenseBackend::DenseBackend(std::size_t n_sites,
                           std::vector<std::shared_ptr<const DensePropagator>> props, CMat rho)
    : n_sites_(n_sites), props_(std::move(props)), pure_(false), rho_(std::move(rho)) {
  if (static_cast<std::size_t>(rho_.rows()) != (std::size_t{1} << n_sites)) {
    throw ConfigError("dense state dimension mismatch");
  }
}

void DenseBackend::promote() {
  if (!pure_) return;
  rho_ = psi_ * psi_.adjoint();
  psi_.resize(0);
  pure_ = false;
}

void DenseBackend::enable_dephasing(const DephasingModel& model, std::vector<std::uint32_t> sites,
                                    std::vector<HamiltonianTerms> hamiltonians, ThreadPool* pool) {
  if (!model.active()) return;
  if (model.n_samples == 0) throw ConfigError("dephasing needs at least one sample");
  if (hamiltonians.size() != props_.size()) {
    throw ConfigError("dephasing needs the Hamiltonian of every propagator");
  }
  promote();
  dephasing_ = model;
  deph_sites_ = std::move(sites);
  hams_ = std::move(hamiltonians);
  pool_ = pool;
  streams_.clear();
  streams_.reserve(model.n_samples);
  for (std::size_t s = 0; s < model.n_samples; ++s) streams_.emplace_back(model, s);
}

void DenseBackend::pulse(const Event& e) {
  const Eigen::Matrix2cd u = rotation_unitary(e.axis, e.angle);
  for (std::uint32_t s : e.sites) {
    if (s >= n_sites_) throw ConfigError("pulse site out of range");
    if (pure_) {
      apply_site_unitary(psi_, s, u);
    } else {
      apply_site_unitary(rho_, s, u);
    }
  }
}

void DenseBackend::free(const Event& e) {
  if (e.hamiltonian >= props_.size()) throw ConfigError("schedule references a missing Hamiltonian");
  if (dephasing_ && e.dephase) {
    dephased_free_evolution(rho_, hams_[e.hamiltonian], n_sites_, deph_sites_, e.duration, streams_,
                            pool_, dephasing_->record_draws ? &last_draws_ : nullptr);
    return;
  }
  const DensePropagator& p = *props_[e.hamiltonian];
  if (pure_) {
    p.evolve(psi_, e.duration);
    return;
  }
  if (use_cache_) {
    const auto key = std::make_pair(e.hamiltonian, e.duration);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, p.unitary(e.duration)).first;
    rho_ = (it->second * rho_ * it->second.adjoint()).eval();
  } else {
    p.evolve(rho_, e.duration);
  }
}

void DenseBackend::reset() {
  promote();
  rho_ = laser_reset(rho_, 0);
}

std::vector<double> DenseBackend::measure(const Observable& obs) const {
  const auto ex = [&](const PauliString& p) { return pure_ ? expectation(psi_, p) : expectation(rho_, p); };
  const auto z = [&](std::uint32_t s) { return ex(PauliString::single(s, Axis::Z)); };
  const auto p = [&](std::uint32_t) { return ex(obs.pauli); };
  return {reduce_observable(obs, std::function<double(std::uint32_t)>(z),
                            std::function<double(std::uint32_t)>(p))};
}

}  // namespace nvlayer
