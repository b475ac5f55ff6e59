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

#include "critical_fronts/simd/rotation_kernels.hpp"

#include <cmath>

namespace cfronts::simd::detail {

// std::fma keeps the rounding identical to the fused vector variants.
void rotate_layer_scalar(double* block, const RotationLayer& layer) {
  for (std::size_t k = 0; k < layer.count; ++k) {
    double* x = block + layer.first[k] * kBlockWidth;
    double* y = block + layer.second[k] * kBlockWidth;
    const double c = layer.cos[k];
    const double s = layer.sin[k];
    for (std::size_t j = 0; j < kBlockWidth; ++j) {
      const double xj = x[j];
      const double yj = y[j];
      x[j] = std::fma(c, xj, s * yj);
      y[j] = std::fma(-s, xj, c * yj);
    }
  }
}

void column_norms_scalar(const double* block, std::size_t rows, double* out) {
  for (std::size_t j = 0; j < kBlockWidth; ++j) out[j] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = block + r * kBlockWidth;
    for (std::size_t j = 0; j < kBlockWidth; ++j)
      out[j] = std::fma(row[j], row[j], out[j]);
  }
}

}  // namespace cfronts::simd::detail
