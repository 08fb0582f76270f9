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

#include <complex>
#include <vector>

namespace nvlayer {

/// One-sided power spectrum over nu in [0, 1/2] (cycles per sample).
/// Normalized so that sum(power) equals the time-domain energy sum(x^2).
struct PowerSpectrum {
  std::vector<double> nu;
  std::vector<double> power;
  std::size_t n_samples = 0;
  std::size_t n_fft = 0;
};

/// Full DFT X_k = sum_n x_n exp(-2 pi i k n / N).
std::vector<std::complex<double>> dft(const std::vector<double>& x);

/// Zero-pads to `pad_to` samples when larger than the input. Throws DomainError for N < 4.
PowerSpectrum psd(const std::vector<double>& x, std::size_t pad_to = 0);

/// Location of the largest bin in [nu_lo, nu_hi], refined by a parabola through its neighbours.
double peak_frequency(const PowerSpectrum& s, double nu_lo = 0.0, double nu_hi = 0.5);

struct CrystallineOptions {
  // Drop the nu = 0 bin from the denominator (use when the trace is baseline-corrected).
  bool exclude_dc = false;
  // Ratio of squared power spectral densities; false uses the plain power ratio.
  bool squared = true;
};

/// Share of spectral weight at nu = 1/2, summed over the two-sided spectrum. An odd-length
/// trace loses its last sample. Throws DomainError for N < 4 or zero total weight.
double crystalline_fraction(const std::vector<double>& x, const CrystallineOptions& opt = {});

}  // namespace nvlayer
