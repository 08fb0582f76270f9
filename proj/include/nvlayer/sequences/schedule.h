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

#include <cstdint>
#include <string>
#include <vector>

#include "nvlayer/geometry/layout.h"

namespace nvlayer {

enum class EventKind { kPulse, kFree, kReset, kMeasure };

struct Event {
  EventKind kind = EventKind::kFree;
  double offset = 0.0;  // s from schedule start
  // kPulse: instantaneous rotation exp(-i angle n.sigma/2) on every listed site.
  std::vector<std::uint32_t> sites;
  Vec3 axis = Vec3::UnitX();
  double angle = 0.0;
  // kFree: evolution under the backend's Hamiltonian `hamiltonian` for `duration`.
  double duration = 0.0;
  std::size_t hamiltonian = 0;
  // Free segments flagged here receive fresh dephasing detunings when a model is active.
  bool dephase = true;
  // kMeasure.
  std::string label;
};

/// Declarative event list. Offsets are assigned on append, so they are always nondecreasing.
class PulseSchedule {
 public:
  PulseSchedule& pulse(std::vector<std::uint32_t> sites, const Vec3& axis, double angle);
  PulseSchedule& free(double duration, std::size_t hamiltonian = 0, bool dephase = true);
  PulseSchedule& reset();
  PulseSchedule& measure(std::string label);
  PulseSchedule& append(const PulseSchedule& other);

  const std::vector<Event>& events() const { return events_; }
  double total_duration() const { return t_; }
  std::size_t count(EventKind kind) const;
  std::size_t count_pulses(double angle, double tol = 1e-12) const;

  /// Throws ConfigError on negative durations or decreasing offsets.
  void validate() const;
  std::string describe() const;

 private:
  std::vector<Event> events_;
  double t_ = 0.0;
};

/// In-plane axis (cos phi, sin phi, 0).
Vec3 phase_axis(double phi);

}  // namespace nvlayer
