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

#include <arm_neon.h>

#include "nvlayer/pauli/kernels.h"

namespace nvlayer::kernels {

void gather_neon(const CsrView& a, const double* x, double* y, std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    std::uint64_t k = a.row_ptr[r];
    const std::uint64_t end = a.row_ptr[r + 1];
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    for (; k + 4 <= end; k += 4) {
      const float64x2_t x0 = {x[a.col[k]], x[a.col[k + 1]]};
      const float64x2_t x1 = {x[a.col[k + 2]], x[a.col[k + 3]]};
      acc0 = vfmaq_f64(acc0, vld1q_f64(a.val + k), x0);
      acc1 = vfmaq_f64(acc1, vld1q_f64(a.val + k + 2), x1);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; k < end; ++k) acc += a.val[k] * x[a.col[k]];
    y[r] = acc;
  }
}

void gather_batched_neon(const CsrView& a, const double* x, double* y, std::size_t lanes,
                         const double* alpha, std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    double* out = y + r * lanes;
    for (std::size_t b = 0; b < lanes; b += 4) {
      float64x2_t acc0 = vdupq_n_f64(0.0);
      float64x2_t acc1 = vdupq_n_f64(0.0);
      for (std::uint64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
        const double* in = x + std::size_t{a.col[k]} * lanes + b;
        acc0 = vfmaq_n_f64(acc0, vld1q_f64(in), a.val[k]);
        acc1 = vfmaq_n_f64(acc1, vld1q_f64(in + 2), a.val[k]);
      }
      vst1q_f64(out + b, vmulq_f64(acc0, vld1q_f64(alpha + b)));
      vst1q_f64(out + b + 2, vmulq_f64(acc1, vld1q_f64(alpha + b + 2)));
    }
  }
}

void scatter_batched_neon(const CsrView& a, const double* x, double* y, std::size_t lanes,
                          std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    const double* in = x + r * lanes;
    for (std::uint64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      double* out = y + std::size_t{a.col[k]} * lanes;
      for (std::size_t b = 0; b < lanes; b += 2) {
        vst1q_f64(out + b, vfmaq_n_f64(vld1q_f64(out + b), vld1q_f64(in + b), a.val[k]));
      }
    }
  }
}

}  // namespace nvlayer::kernels
