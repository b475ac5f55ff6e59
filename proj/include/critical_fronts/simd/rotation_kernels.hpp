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

#pragma once

// Batched Givens-rotation kernels acting on column blocks of an orthogonal
// propagator. A block stores `rows` consecutive rows of kBlockWidth doubles;
// every rotation mixes two rows:
//
//   x' =  c x + s y
//   y' = -s x + c y
//
// The scalar variant is the reference. Vector variants must agree with it
// to the last ulp-level rounding of a fused multiply-add.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace cfronts::simd {

inline constexpr std::size_t kBlockWidth = 8;

enum class Isa { kScalar, kAvx2, kAvx512, kNeon };

std::string_view isa_name(Isa isa);

// One layer of mutually disjoint rotations. `first[k]`, `second[k]` are row
// indices inside the block.
struct RotationLayer {
  const std::uint32_t* first = nullptr;
  const std::uint32_t* second = nullptr;
  const double* cos = nullptr;
  const double* sin = nullptr;
  std::size_t count = 0;
};

using RotateLayerFn = void (*)(double* block, const RotationLayer& layer);

// Per-column sum of squares over `rows` rows: out[c] = sum_r block[r][c]^2.
using ColumnNormsFn = void (*)(const double* block, std::size_t rows,
                               double* out);

struct KernelTable {
  Isa isa;
  RotateLayerFn rotate_layer;
  ColumnNormsFn column_norms;
};

// Variants compiled into this binary and supported by the running CPU.
std::span<const Isa> available_isas();

bool isa_supported(Isa isa);

// Throws std::invalid_argument when `isa` is not supported at runtime.
const KernelTable& kernels_for(Isa isa);

// Best supported variant, unless CFRONTS_SIMD=scalar|avx2|avx512|neon
// forces a specific one.
const KernelTable& active_kernels();

namespace detail {
void rotate_layer_scalar(double* block, const RotationLayer& layer);
void column_norms_scalar(const double* block, std::size_t rows, double* out);
#if defined(__x86_64__) || defined(_M_X64)
void rotate_layer_avx2(double* block, const RotationLayer& layer);
void column_norms_avx2(const double* block, std::size_t rows, double* out);
void rotate_layer_avx512(double* block, const RotationLayer& layer);
void column_norms_avx512(const double* block, std::size_t rows, double* out);
#endif
#if defined(__aarch64__)
void rotate_layer_neon(double* block, const RotationLayer& layer);
void column_norms_neon(const double* block, std::size_t rows, double* out);
#endif
}  // namespace detail

}  // namespace cfronts::simd
