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

#include <immintrin.h>

#include "nvlayer/pauli/kernels.h"

namespace nvlayer::kernels {

void gather_avx2(const CsrView& a, const double* x, double* y, std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    std::uint64_t k = a.row_ptr[r];
    const std::uint64_t end = a.row_ptr[r + 1];
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (; k + 8 <= end; k += 8) {
      const __m128i i0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.col + k));
      const __m128i i1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.col + k + 4));
      const __m256d x0 = _mm256_i32gather_pd(x, i0, 8);
      const __m256d x1 = _mm256_i32gather_pd(x, i1, 8);
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.val + k), x0, acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.val + k + 4), x1, acc1);
    }
    for (; k + 4 <= end; k += 4) {
      const __m128i i0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.col + k));
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.val + k), _mm256_i32gather_pd(x, i0, 8), acc0);
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    const __m128d lo = _mm256_castpd256_pd128(acc0);
    const __m128d hi = _mm256_extractf128_pd(acc0, 1);
    const __m128d s2 = _mm_add_pd(lo, hi);
    double acc = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
    for (; k < end; ++k) acc += a.val[k] * x[a.col[k]];
    y[r] = acc;
  }
}

void gather_batched_avx2(const CsrView& a, const double* x, double* y, std::size_t lanes,
                         const double* alpha, std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    double* out = y + r * lanes;
    const std::uint64_t begin = a.row_ptr[r];
    const std::uint64_t end = a.row_ptr[r + 1];
    std::size_t b = 0;
    for (; b + 8 <= lanes; b += 8) {
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (std::uint64_t k = begin; k < end; ++k) {
        const __m256d v = _mm256_broadcast_sd(a.val + k);
        const double* in = x + std::size_t{a.col[k]} * lanes + b;
        acc0 = _mm256_fmadd_pd(v, _mm256_loadu_pd(in), acc0);
        acc1 = _mm256_fmadd_pd(v, _mm256_loadu_pd(in + 4), acc1);
      }
      _mm256_storeu_pd(out + b, _mm256_mul_pd(acc0, _mm256_loadu_pd(alpha + b)));
      _mm256_storeu_pd(out + b + 4, _mm256_mul_pd(acc1, _mm256_loadu_pd(alpha + b + 4)));
    }
    for (; b < lanes; b += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::uint64_t k = begin; k < end; ++k) {
        const double* in = x + std::size_t{a.col[k]} * lanes + b;
        acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a.val + k), _mm256_loadu_pd(in), acc);
      }
      _mm256_storeu_pd(out + b, _mm256_mul_pd(acc, _mm256_loadu_pd(alpha + b)));
    }
  }
}

void scatter_batched_avx2(const CsrView& a, const double* x, double* y, std::size_t lanes,
                          std::size_t r0, std::size_t r1) {
  for (std::size_t r = r0; r < r1; ++r) {
    const double* in = x + r * lanes;
    for (std::uint64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      const __m256d v = _mm256_broadcast_sd(a.val + k);
      double* out = y + std::size_t{a.col[k]} * lanes;
      for (std::size_t b = 0; b < lanes; b += 4) {
        _mm256_storeu_pd(out + b,
                         _mm256_fmadd_pd(v, _mm256_loadu_pd(in + b), _mm256_loadu_pd(out + b)));
      }
    }
  }
}

}  // namespace nvlayer::kernels
