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

#include <cstddef>
#include <cstdint>
#include <string>

namespace nvlayer {

enum class KernelChoice { kAuto, kScalar, kAvx2, kNeon };

std::string kernel_name(KernelChoice k);
KernelChoice parse_kernel(const std::string& name);

/// True when the kernel was compiled in and the running CPU supports it.
bool kernel_available(KernelChoice k);

/// kAuto resolves to the best available kernel; explicit unavailable choices throw.
KernelChoice resolve_kernel(KernelChoice k);

/// Compressed rows: row r owns entries [row_ptr[r], row_ptr[r+1]).
struct CsrView {
  std::size_t rows = 0;
  const std::uint64_t* row_ptr = nullptr;
  const std::uint32_t* col = nullptr;
  const double* val = nullptr;
};

namespace kernels {

// Gather: y[r] = sum_k val[k] * x[col[k]] for rows in [r0, r1).
// Batched variants hold `lanes` interleaved states (x[i * lanes + b]) and multiply lane b of
// every output row by alpha[b]. `lanes` must be a multiple of 4 for the SIMD variants.
// Scatter (rows are sources): y[col[k]] += val[k] * x[r]; y must be zeroed by the caller.

void gather_scalar(const CsrView& a, const double* x, double* y, std::size_t r0, std::size_t r1);
void gather_batched_scalar(const CsrView& a, const double* x, double* y, std::size_t lanes,
                           const double* alpha, std::size_t r0, std::size_t r1);
void scatter_scalar(const CsrView& a, const double* x, double* y, std::size_t r0, std::size_t r1);
void scatter_batched_scalar(const CsrView& a, const double* x, double* y, std::size_t lanes,
                            std::size_t r0, std::size_t r1);

#if defined(NVLAYER_HAVE_AVX2_KERNELS)
void gather_avx2(const CsrView& a, const double* x, double* y, std::size_t r0, std::size_t r1);
void gather_batched_avx2(const CsrView& a, const double* x, double* y, std::size_t lanes,
                         const double* alpha, std::size_t r0, std::size_t r1);
void scatter_batched_avx2(const CsrView& a, const double* x, double* y, std::size_t lanes,
                          std::size_t r0, std::size_t r1);
#endif

#if defined(NVLAYER_HAVE_NEON_KERNELS)
void gather_neon(const CsrView& a, const double* x, double* y, std::size_t r0, std::size_t r1);
void gather_batched_neon(const CsrView& a, const double* x, double* y, std::size_t lanes,
                         const double* alpha, std::size_t r0, std::size_t r1);
void scatter_batched_neon(const CsrView& a, const double* x, double* y, std::size_t lanes,
                          std::size_t r0, std::size_t r1);
#endif

}  // namespace kernels

}  // namespace nvlayer
