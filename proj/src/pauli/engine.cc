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

#include "nvlayer/pauli/engine.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "nvlayer/errors.h"

namespace nvlayer {

TruncatedState::TruncatedState(std::size_t dim, std::size_t lanes)
    : dim_(dim), lanes_(lanes), c_(dim * lanes, 0.0), alpha_(lanes, 1.0) {
  if (lanes == 0) throw ConfigError("state needs at least one lane");
  if (dim > 0) {
    for (std::size_t b = 0; b < lanes; ++b) c_[b] = 1.0;
  }
}

void TruncatedState::set_alpha(std::vector<double> alpha) {
  if (alpha.size() != lanes_) throw ConfigError("alpha must have one entry per lane");
  alpha_ = std::move(alpha);
}

TruncatedState TruncatedState::lane(std::size_t b) const {
  TruncatedState s(dim_, 1);
  for (std::size_t i = 0; i < dim_; ++i) s.c_[i] = c_[i * lanes_ + b];
  s.alpha_[0] = alpha_[b];
  return s;
}

TruncatedState product_state(const TruncatedBasis& basis, const std::vector<Vec3>& bloch,
                             std::size_t lanes) {
  if (bloch.size() != basis.num_sites()) {
    throw ConfigError("product state needs one Bloch vector per site");
  }
  TruncatedState s(basis.size(), lanes);
  for (std::size_t i = 1; i < basis.size(); ++i) {
    double c = 1.0;
    for (const auto& f : basis.string(i)) {
      c *= bloch[f.site][static_cast<int>(f.axis) - 1];
      if (c == 0.0) break;
    }
    for (std::size_t b = 0; b < lanes; ++b) s.at(i, b) = c;
  }
  return s;
}

PauliEngine::PauliEngine(const TruncatedBasis& basis, const ActionTable& table, EngineOptions opt)
    : basis_(&basis), table_(&table), opt_(opt) {
  if (table.dim() != basis.size() || table.basis_hash() != basis.hash()) {
    throw ConfigError("action table was built for a different basis");
  }
  if (opt_.taylor_order < 1) throw ConfigError("Taylor order must be at least 1");
  if (!(opt_.step_bound > 0.0)) throw ConfigError("step bound must be positive");
  opt_.kernel = resolve_kernel(opt_.kernel);

  triplets_.assign(basis.num_sites(), {});
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const PauliString& p = basis.string(i);
    for (const auto& f : p) {
      if (f.axis != Axis::X) continue;
      const auto iy = basis.find(p.with_axis(f.site, Axis::Y));
      const auto iz = basis.find(p.with_axis(f.site, Axis::Z));
      if (!iy || !iz) throw ConfigError("basis is not closed under single-site rotations");
      triplets_[f.site].push_back({static_cast<std::uint32_t>(i), *iy, *iz});
    }
    if (p.weight() && p.factor(0).site == 0) {
      if (p.factor(0).axis == Axis::Z) {
        const auto q = basis.find(p.with_axis(0, Axis::I));
        if (!q) throw ConfigError("basis is not closed under NV reset");
        reset_copy_.emplace_back(static_cast<std::uint32_t>(i), *q);
      } else {
        reset_zero_.push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
}

std::size_t PauliEngine::steps_for(double t, double max_alpha) const {
  const double x = t * table_->lambda() * max_alpha / opt_.step_bound;
  if (x <= 0.0) return t > 0.0 ? 1 : 0;
  return static_cast<std::size_t>(std::ceil(x * (1.0 - 1e-12)));
}

void PauliEngine::step(TruncatedState& s, double dt) const {
  if (s.dim_ != table_->dim()) throw ConfigError("state does not match the action table");
  if (dt == 0.0) return;
  double amax = 0.0;
  for (double a : s.alpha_) amax = std::max(amax, std::abs(a));
  if (std::abs(dt) * table_->lambda() * amax > opt_.step_bound * (1.0 + 1e-9)) {
    throw StepSizeError("step dt=" + std::to_string(dt) + " s exceeds the stability bound");
  }
  const std::size_t n = s.c_.size();
  s.work_a_.assign(s.c_.begin(), s.c_.end());
  s.work_b_.resize(n);
  double* x = s.work_a_.data();
  double* y = s.work_b_.data();
  for (int k = 1; k <= opt_.taylor_order; ++k) {
    if (s.lanes_ == 1) {
      table_->apply(x, y, opt_.kernel, opt_.pool);
      const double f = dt * s.alpha_[0] / k;
      for (std::size_t i = 0; i < n; ++i) {
        y[i] *= f;
        s.c_[i] += y[i];
      }
    } else {
      table_->apply_batched(x, y, s.lanes_, s.alpha_.data(), opt_.kernel, opt_.pool);
      const double f = dt / k;
      for (std::size_t i = 0; i < n; ++i) {
        y[i] *= f;
        s.c_[i] += y[i];
      }
    }
    std::swap(x, y);
  }
}

void PauliEngine::evolve(TruncatedState& s, double t) const {
  if (t < 0.0) throw ConfigError("evolution time must be non-negative");
  double amax = 0.0;
  for (double a : s.alpha_) amax = std::max(amax, std::abs(a));
  const std::size_t n = steps_for(t, amax);
  if (n == 0) return;
  const double dt = t / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) step(s, dt);
}

void PauliEngine::apply_pulse(TruncatedState& s, const std::vector<std::uint32_t>& sites,
                              const Vec3& axis, double angle) const {
  const Eigen::Matrix3d R = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  const std::size_t L = s.lanes_;
  for (std::uint32_t site : sites) {
    if (site >= triplets_.size()) throw ConfigError("pulse site out of range");
    for (const auto& t : triplets_[site]) {
      for (std::size_t b = 0; b < L; ++b) {
        const double vx = s.c_[t[0] * L + b];
        const double vy = s.c_[t[1] * L + b];
        const double vz = s.c_[t[2] * L + b];
        s.c_[t[0] * L + b] = R(0, 0) * vx + R(0, 1) * vy + R(0, 2) * vz;
        s.c_[t[1] * L + b] = R(1, 0) * vx + R(1, 1) * vy + R(1, 2) * vz;
        s.c_[t[2] * L + b] = R(2, 0) * vx + R(2, 1) * vy + R(2, 2) * vz;
      }
    }
  }
}

void PauliEngine::laser_reset(TruncatedState& s) const {
  const std::size_t L = s.lanes_;
  for (const auto& [zq, q] : reset_copy_) {
    for (std::size_t b = 0; b < L; ++b) s.c_[zq * L + b] = s.c_[q * L + b];
  }
  for (std::uint32_t i : reset_zero_) {
    for (std::size_t b = 0; b < L; ++b) s.c_[i * L + b] = 0.0;
  }
}

double PauliEngine::expectation(const TruncatedState& s, const PauliString& p,
                                std::size_t lane) const {
  return s.at(basis_->index(p), lane);
}

double PauliEngine::mean_z(const TruncatedState& s, const std::vector<std::uint32_t>& sites,
                           std::size_t lane) const {
  if (sites.empty()) throw QueryError("mean over an empty site set");
  double acc = 0.0;
  for (std::uint32_t site : sites) acc += expectation(s, PauliString::single(site, Axis::Z), lane);
  return acc / static_cast<double>(sites.size());
}

void PauliEngine::check_physical(const TruncatedState& s) const {
  const std::size_t n1 = 3 * basis_->num_sites();
  for (std::size_t i = 1; i <= n1; ++i) {
    for (std::size_t b = 0; b < s.lanes_; ++b) {
      if (!(std::abs(s.at(i, b)) <= 1.0 + 1e-6)) {
        throw StepSizeError("Bloch component " + basis_->string(i).str() +
                            " left the physical range; reduce the step bound");
      }
    }
  }
}

}  // namespace nvlayer
