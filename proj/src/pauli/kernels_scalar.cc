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

#include "nvlayer/pauli/kernels.h"

namespace nvlayer::kernels {

void gather_scalar(const CsrView& a, const double* x, double* y, std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    double acc = 0.0;
    for (std::uint64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) acc += a.val[k] * x[a.col[k]];
    y[r] = acc;
  }
}

void gather_batched_scalar(const CsrView& a, const double* x, double* y, std::size_t lanes,
                           const double* alpha, std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    double* out = y + r * lanes;
    for (std::size_t b = 0; b < lanes; ++b) out[b] = 0.0;
    for (std::uint64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const double v = a.val[k];
      const double* in = x + std::size_t{a.col[k]} * lanes;
      for (std::size_t b = 0; b < lanes; ++b) out[b] += v * in[b];
    }
    for (std::size_t b = 0; b < lanes; ++b) out[b] *= alpha[b];
  }
}

void scatter_scalar(const CsrView& a, const double* x, double* y, std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::uint64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) y[a.col[k]] += a.val[k] * xr;
  }
}

void scatter_batched_scalar(const CsrView& a, const double* x, double* y, std::size_t lanes,
                            std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    const double* in = x + r * lanes;
    for (std::uint64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const double v = a.val[k];
      double* out = y + std::size_t{a.col[k]} * lanes;
      for (std::size_t b = 0; b < lanes; ++b) out[b] += v * in[b];
    }
  }
}

}  // namespace nvlayer::kernels
