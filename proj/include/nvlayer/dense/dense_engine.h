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
#include <mutex>

#include "nvlayer/dense/dense_ops.h"

namespace nvlayer {

/// Exact propagator exp(-iHt) from one eigendecomposition of H. Real Hamiltonians take the
/// real-symmetric path. Thread-safe for concurrent use after construction.
class DensePropagator {
 public:
  DensePropagator(const HamiltonianTerms& h, std::size_t n_sites,
                  std::size_t max_spins = kDefaultMaxDenseSpins);

  std::size_t dim() const { return dim_; }
  bool is_real() const { return real_; }
  const Eigen::VectorXd& eigenvalues() const { return evals_; }

  CMat unitary(double t) const;
  void evolve(CVec& psi, double t) const;
  void evolve(CMat& rho, double t) const;

  /// Unitary for t, memoized by exact t.
  const CMat& cached_unitary(double t) const;

 private:
  std::size_t dim_;
  bool real_ = false;
  Eigen::VectorXd evals_;
  Eigen::MatrixXd vr_;  // real path
  CMat vc_;             // complex path
  mutable std::mutex mu_;
  mutable std::map<double, std::unique_ptr<CMat>> cache_;
};

/// rho(t) = U rho U^dagger for a one-off evolution.
CMat evolve_dense(const CMat& rho, const HamiltonianTerms& h, std::size_t n_sites, double t,
                  std::size_t max_spins = kDefaultMaxDenseSpins);

}  // namespace nvlayer
