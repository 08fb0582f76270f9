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

#include "nvlayer/analysis/spectral.h"

#include <cmath>

#include <unsupported/Eigen/FFT>

#include "nvlayer/errors.h"

namespace nvlayer {

std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in(x.begin(), x.end()), out;
  fft.fwd(out, in);
  return out;
}

PowerSpectrum psd(const std::vector<double>& x, std::size_t pad_to) {
  if (x.size() < 4) throw DomainError("power spectrum needs at least 4 samples");
  std::vector<double> padded = x;
  if (pad_to > padded.size()) padded.resize(pad_to, 0.0);
  const std::size_t n = padded.size();
  const auto X = dft(padded);
  PowerSpectrum s;
  s.n_samples = x.size();
  s.n_fft = n;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double p = std::norm(X[k]) * inv;
    // Interior bins stand for both +nu and -nu.
    if (k != 0 && !(n % 2 == 0 && k == n / 2)) p *= 2.0;
    s.nu.push_back(static_cast<double>(k) * inv);
    s.power.push_back(p);
  }
  return s;
}

double peak_frequency(const PowerSpectrum& s, double nu_lo, double nu_hi) {
  std::size_t best = s.power.size();
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    if (s.nu[k] < nu_lo || s.nu[k] > nu_hi) continue;
    if (best == s.power.size() || s.power[k] > s.power[best]) best = k;
  }
  if (best == s.power.size()) throw DomainError("no spectrum bins in the requested band");
  if (best == 0 || best + 1 >= s.power.size()) return s.nu[best];
  const double a = s.power[best - 1], b = s.power[best], c = s.power[best + 1];
  const double den = a - 2.0 * b + c;
  const double shift = den == 0.0 ? 0.0 : 0.5 * (a - c) / den;
  return s.nu[best] + shift * (s.nu[1] - s.nu[0]);
}

double crystalline_fraction(const std::vector<double>& x, const CrystallineOptions& opt) {
  std::vector<double> v = x;
  if (v.size() % 2) v.pop_back();
  if (v.size() < 4) throw DomainError("crystalline fraction needs at least 4 samples");
  const auto X = dft(v);
  const std::size_t n = v.size();
  double total = 0.0, half = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 && opt.exclude_dc) continue;
    const double p = std::norm(X[k]);
    const double w = opt.squared ? p * p : p;
    total += w;
    if (k == n / 2) half = w;
  }
  if (!(total > 0.0)) throw DomainError("crystalline fraction of a trace with no spectral weight");
  return half / total;
}

}  // namespace nvlayer
