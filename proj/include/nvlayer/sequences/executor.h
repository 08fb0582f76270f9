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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nvlayer/dense/dense_engine.h"
#include "nvlayer/dense/dephasing.h"
#include "nvlayer/pauli/engine.h"
#include "nvlayer/sequences/schedule.h"

namespace nvlayer {

class ThreadPool;

struct Observable {
  enum class Kind { kPauli, kMeanZ, kWeightedZ };
  std::string name;
  Kind kind = Kind::kPauli;
  PauliString pauli;
  std::vector<std::uint32_t> sites;
  std::vector<double> weights;  // kWeightedZ; normalized on evaluation

  static Observable pauli_string(std::string name, const PauliString& p);
  static Observable mean_z(std::string name, std::vector<std::uint32_t> sites);
  static Observable weighted_z(std::string name, std::vector<std::uint32_t> sites,
                               std::vector<double> weights);
};

/// State holder that a schedule drives. Lanes are independent runs sharing the schedule.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::size_t lanes() const { return 1; }
  virtual void pulse(const Event& e) = 0;
  virtual void free(const Event& e) = 0;
  virtual void reset() = 0;
  /// One value per lane.
  virtual std::vector<double> measure(const Observable& obs) const = 0;
};

struct MeasurementRecord {
  double time = 0.0;
  std::string label;
  std::vector<std::vector<double>> values;  // [observable][lane]
  std::vector<double> detunings;            // debug: draws of sample path 0 in the last segment
};

class DenseBackend;

std::vector<MeasurementRecord> run_schedule(Backend& backend, const PulseSchedule& schedule,
                                            const std::vector<Observable>& observables);

/// Truncated Pauli-string backend; one engine per free-evolution Hamiltonian index.
class TruncatedBackend : public Backend {
 public:
  TruncatedBackend(std::vector<const PauliEngine*> engines, TruncatedState state);

  std::size_t lanes() const override { return state_.lanes(); }
  void pulse(const Event& e) override;
  void free(const Event& e) override;
  void reset() override;
  std::vector<double> measure(const Observable& obs) const override;

  const TruncatedState& state() const { return state_; }
  TruncatedState& state() { return state_; }

 private:
  std::vector<const PauliEngine*> engines_;
  TruncatedState state_;
};

/// Dense backend over a pure state or a density operator.
class DenseBackend : public Backend {
 public:
  DenseBackend(std::size_t n_sites, std::vector<std::shared_ptr<const DensePropagator>> props,
               CVec psi);
  DenseBackend(std::size_t n_sites, std::vector<std::shared_ptr<const DensePropagator>> props,
               CMat rho);

  /// Enables per-segment dephasing on `sites` (density mode; a pure state is promoted).
  /// `hamiltonians` must match the propagators index by index.
  void enable_dephasing(const DephasingModel& model, std::vector<std::uint32_t> sites,
                        std::vector<HamiltonianTerms> hamiltonians, ThreadPool* pool = nullptr);
  /// Memoizes segment unitaries by exact duration (useful when durations repeat).
  void set_unitary_cache(bool on) { use_cache_ = on; }

  void pulse(const Event& e) override;
  void free(const Event& e) override;
  void reset() override;
  std::vector<double> measure(const Observable& obs) const override;

  bool is_pure() const { return pure_; }
  const CVec& psi() const { return psi_; }
  const CMat& rho() const { return rho_; }
  const std::vector<double>& last_draws() const { return last_draws_; }

 private:
  void promote();

  std::size_t n_sites_;
  std::vector<std::shared_ptr<const DensePropagator>> props_;
  bool pure_;
  CVec psi_;
  CMat rho_;
  bool use_cache_ = false;
  std::map<std::pair<std::size_t, double>, CMat> cache_;
  std::optional<DephasingModel> dephasing_;
  std::vector<std::uint32_t> deph_sites_;
  std::vector<HamiltonianTerms> hams_;
  std::vector<DetuningStream> streams_;
  ThreadPool* pool_ = nullptr;
  std::vector<double> last_draws_;
};

}  // namespace nvlayer
