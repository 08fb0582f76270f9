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

#include "nvlayer/sequences/axy.h"

#include <cmath>
#include <vector>

#include "nvlayer/errors.h"

namespace nvlayer {

namespace {

constexpr double kPi = constants::kPi;

}  // namespace

double axy_harmonic(double x1, double x2, int k) {
  if (k <= 0) throw DomainError("harmonic index must be positive");
  const double xs[5] = {x1, x2, 0.5, 1.0 - x2, 1.0 - x1};
  double s = 0.0;
  for (int j = 0; j < 5; ++j) s += ((j & 1) ? -1.0 : 1.0) * std::sin(k * kPi * xs[j]);
  return 4.0 / (k * kPi) * s;
}

AxyTiming solve_axy_timing(const std::array<double, 4>& f, double tol) {
  if (f[1] != 0.0 || f[3] != 0.0) {
    throw InfeasibleError(
        "symmetric five-pulse blocks have vanishing even harmonics; f2 and f4 must be 0");
  }
  if (!(f[0] > 0.0 && f[0] < 4.0 / kPi)) {
    throw InfeasibleError("f1 must lie in (0, 4/pi)");
  }
  const auto residual = [&](double a, double b) {
    return std::array<double, 2>{axy_harmonic(a, b, 1) - f[0], axy_harmonic(a, b, 3) - f[2]};
  };
  struct Root {
    double x1, x2;
  };
  std::vector<Root> roots;
  constexpr int kGrid = 24;
  for (int i = 1; i < kGrid; ++i) {
    for (int j = i + 1; j < kGrid; ++j) {
      double a = 0.5 * i / kGrid;
      double b = 0.5 * j / kGrid;
      bool ok = false;
      for (int it = 0; it < 100; ++it) {
        const auto r = residual(a, b);
        if (std::hypot(r[0], r[1]) < tol) {
          ok = true;
          break;
        }
        // Analytic Jacobian of (f1, f3) in (x1, x2).
        const double j11 = 8.0 * std::cos(kPi * a);
        const double j12 = -8.0 * std::cos(kPi * b);
        const double j21 = 8.0 * std::cos(3 * kPi * a);
        const double j22 = -8.0 * std::cos(3 * kPi * b);
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-14) break;
        double da = (j22 * r[0] - j12 * r[1]) / det;
        double db = (-j21 * r[0] + j11 * r[1]) / det;
        const double step = std::max(std::abs(da), std::abs(db));
        if (step > 0.05) {
          da *= 0.05 / step;
          db *= 0.05 / step;
        }
        a -= da;
        b -= db;
        if (!(a > -0.1 && b < 0.6)) break;
      }
      if (!ok || !(a > 0.0 && a < b && b < 0.5)) continue;
      bool dup = false;
      for (const auto& r : roots) dup |= std::abs(r.x1 - a) < 1e-7 && std::abs(r.x2 - b) < 1e-7;
      if (!dup) roots.push_back({a, b});
    }
  }
  if (roots.empty()) {
    throw InfeasibleError("no pulse positions realize f1=" + std::to_string(f[0]) +
                          ", f3=" + std::to_string(f[2]));
  }
  const Root* best = &roots[0];
  for (const auto& r : roots) {
    if (r.x1 < best->x1) best = &r;
  }
  AxyTiming t;
  t.f = f;
  t.x1 = best->x1;
  t.x2 = best->x2;
  return t;
}

PulseSchedule axy_schedule(const AxyTiming& timing, double nu_hz, std::size_t n_blocks,
                           const AxyOptions& opt) {
  if (!(nu_hz > 0.0)) throw ConfigError("AXY target frequency must be positive");
  const double tau = 1.0 / (2.0 * nu_hz);
  const auto x = timing.fractions();
  const std::vector<std::uint32_t> nv{opt.nv_site};
  PulseSchedule s;
  if (opt.bracket) s.pulse(nv, Vec3::UnitY(), 0.5 * constants::kPi);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const double base = kXy8Phases[b % 8];
    double prev = 0.0;
    for (int j = 0; j < 5; ++j) {
      s.free((x[j] - prev) * tau);
      prev = x[j];
      const double phi = base + (opt.knill_phases ? kKnillPhases[j] : 0.0);
      s.pulse(nv, phase_axis(phi), constants::kPi);
    }
    s.free((1.0 - prev) * tau);
  }
  if (opt.bracket) s.pulse(nv, -Vec3::UnitY(), 0.5 * constants::kPi);
  return s;
}

}  // namespace nvlayer
