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

#include "nvlayer/sequences/schedule.h"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "nvlayer/errors.h"

namespace nvlayer {

PulseSchedule& PulseSchedule::pulse(std::vector<std::uint32_t> sites, const Vec3& axis,
                                    double angle) {
  Event e;
  e.kind = EventKind::kPulse;
  e.offset = t_;
  e.sites = std::move(sites);
  e.axis = axis.normalized();
  e.angle = angle;
  events_.push_back(std::move(e));
  return *this;
}

PulseSchedule& PulseSchedule::free(double duration, std::size_t hamiltonian, bool dephase) {
  if (duration < 0.0) throw ConfigError("free evolution duration must be non-negative");
  if (duration == 0.0) return *this;
  Event e;
  e.kind = EventKind::kFree;
  e.offset = t_;
  e.duration = duration;
  e.hamiltonian = hamiltonian;
  e.dephase = dephase;
  events_.push_back(std::move(e));
  t_ += duration;
  return *this;
}

PulseSchedule& PulseSchedule::reset() {
  Event e;
  e.kind = EventKind::kReset;
  e.offset = t_;
  events_.push_back(std::move(e));
  return *this;
}

PulseSchedule& PulseSchedule::measure(std::string label) {
  Event e;
  e.kind = EventKind::kMeasure;
  e.offset = t_;
  e.label = std::move(label);
  events_.push_back(std::move(e));
  return *this;
}

PulseSchedule& PulseSchedule::append(const PulseSchedule& other) {
  const double base = t_;
  for (Event e : other.events_) {
    e.offset += base;
    events_.push_back(std::move(e));
  }
  t_ += other.t_;
  return *this;
}

std::size_t PulseSchedule::count(EventKind kind) const {
  std::size_t n = 0;
  for (const auto& e : events_) n += e.kind == kind;
  return n;
}

std::size_t PulseSchedule::count_pulses(double angle, double tol) const {
  std::size_t n = 0;
  for (const auto& e : events_) n += e.kind == EventKind::kPulse && std::abs(e.angle - angle) <= tol;
  return n;
}

void PulseSchedule::validate() const {
  double last = 0.0;
  for (const auto& e : events_) {
    if (e.duration < 0.0) throw ConfigError("schedule contains a negative duration");
    if (e.offset < last) throw ConfigError("schedule offsets decrease");
    last = e.offset;
  }
}

std::string PulseSchedule::describe() const {
  std::ostringstream os;
  os << std::setprecision(12);
  for (const auto& e : events_) {
    os << e.offset << ' ';
    switch (e.kind) {
      case EventKind::kPulse:
        os << "pulse angle=" << e.angle << " axis=(" << e.axis.x() << ',' << e.axis.y() << ','
           << e.axis.z() << ") sites=" << e.sites.size();
        break;
      case EventKind::kFree:
        os << "free " << e.duration << " h=" << e.hamiltonian;
        break;
      case EventKind::kReset:
        os << "reset";
        break;
      case EventKind::kMeasure:
        os << "measure " << e.label;
        break;
    }
    os << '\n';
  }
  return os.str();
}

Vec3 phase_axis(double phi) { return Vec3(std::cos(phi), std::sin(phi), 0.0); }

}  // namespace nvlayer
