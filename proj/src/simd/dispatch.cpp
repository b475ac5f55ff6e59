// Copyright 2026 The critical-fronts Authors
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

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "critical_fronts/simd/rotation_kernels.hpp"

namespace cfronts::simd {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2:
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::kAvx512:
      return __builtin_cpu_supports("avx512f");
#endif
#if defined(__aarch64__)
    case Isa::kNeon:
      return true;
#endif
    default:
      return false;
  }
}

const std::vector<Isa>& supported() {
  static const std::vector<Isa> isas = [] {
    std::vector<Isa> out;
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kAvx512, Isa::kNeon})
      if (cpu_has(isa)) out.push_back(isa);
    return out;
  }();
  return isas;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kAvx512: return "avx512";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

std::span<const Isa> available_isas() { return supported(); }

bool isa_supported(Isa isa) { return cpu_has(isa); }

const KernelTable& kernels_for(Isa isa) {
  static const KernelTable scalar{Isa::kScalar, detail::rotate_layer_scalar,
                                  detail::column_norms_scalar};
#if defined(__x86_64__) || defined(_M_X64)
  static const KernelTable avx2{Isa::kAvx2, detail::rotate_layer_avx2,
                                detail::column_norms_avx2};
  static const KernelTable avx512{Isa::kAvx512, detail::rotate_layer_avx512,
                                  detail::column_norms_avx512};
#endif
#if defined(__aarch64__)
  static const KernelTable neon{Isa::kNeon, detail::rotate_layer_neon,
                                detail::column_norms_neon};
#endif
  if (!cpu_has(isa))
    throw std::invalid_argument("SIMD variant not supported on this CPU: " +
                                std::string(isa_name(isa)));
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2: return avx2;
    case Isa::kAvx512: return avx512;
#endif
#if defined(__aarch64__)
    case Isa::kNeon: return neon;
#endif
    default: return scalar;
  }
}

const KernelTable& active_kernels() {
  static const KernelTable& table = []() -> const KernelTable& {
    if (const char* forced = std::getenv("CFRONTS_SIMD")) {
      const std::string_view name(forced);
      for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kAvx512, Isa::kNeon})
        if (name == isa_name(isa)) return kernels_for(isa);
      throw std::invalid_argument("unknown CFRONTS_SIMD value: " +
                                  std::string(name));
    }
    return kernels_for(supported().back());
  }();
  return table;
}

}  // namespace cfronts::simd
