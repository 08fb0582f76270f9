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

#include "nvlayer/errors.h"

namespace nvlayer {

std::string kernel_name(KernelChoice k) {
  switch (k) {
    case KernelChoice::kAuto:
      return "auto";
    case KernelChoice::kScalar:
      return "scalar";
    case KernelChoice::kAvx2:
      return "avx2";
    case KernelChoice::kNeon:
      return "neon";
  }
  return "unknown";
}

KernelChoice parse_kernel(const std::string& name) {
  if (name == "auto") return KernelChoice::kAuto;
  if (name == "scalar") return KernelChoice::kScalar;
  if (name == "avx2") return KernelChoice::kAvx2;
  if (name == "neon") return KernelChoice::kNeon;
  throw ConfigError("unknown kernel '" + name + "' (expected auto, scalar, avx2 or neon)");
}

bool kernel_available(KernelChoice k) {
  switch (k) {
    case KernelChoice::kAuto:
    case KernelChoice::kScalar:
      return true;
    case KernelChoice::kAvx2:
#if defined(NVLAYER_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case KernelChoice::kNeon:
#if defined(NVLAYER_HAVE_NEON_KERNELS)
      return true;  // Advanced SIMD is mandatory on AArch64.
#else
      return false;
#endif
  }
  return false;
}

KernelChoice resolve_kernel(KernelChoice k) {
  if (k == KernelChoice::kAuto) {
    if (kernel_available(KernelChoice::kAvx2)) return KernelChoice::kAvx2;
    if (kernel_available(KernelChoice::kNeon)) return KernelChoice::kNeon;
    return KernelChoice::kScalar;
  }
  if (!kernel_available(k)) {
    throw ConfigError("kernel '" + kernel_name(k) + "' is not available on this machine");
  }
  return k;
}

}  // namespace nvlayer
