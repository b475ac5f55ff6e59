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

#if defined(__aarch64__)
#include <arm_neon.h>

namespace cfronts::simd::detail {

void rotate_layer_neon(double* block, const RotationLayer& layer) {
  for (std::size_t k = 0; k < layer.count; ++k) {
    double* x = block + layer.first[k] * kBlockWidth;
    double* y = block + layer.second[k] * kBlockWidth;
    const float64x2_t c = vdupq_n_f64(layer.cos[k]);
    const float64x2_t s = vdupq_n_f64(layer.sin[k]);
    const float64x2_t ns = vdupq_n_f64(-layer.sin[k]);
    for (std::size_t j = 0; j < kBlockWidth; j += 2) {
      const float64x2_t xv = vld1q_f64(x + j);
      const float64x2_t yv = vld1q_f64(y + j);
      vst1q_f64(x + j, vfmaq_f64(vmulq_f64(s, yv), c, xv));
      vst1q_f64(y + j, vfmaq_f64(vmulq_f64(c, yv), ns, xv));
    }
  }
}

void column_norms_neon(const double* block, std::size_t rows, double* out) {
  float64x2_t acc[kBlockWidth / 2];
  for (auto& a : acc) a = vdupq_n_f64(0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = block + r * kBlockWidth;
    for (std::size_t j = 0; j < kBlockWidth / 2; ++j) {
      const float64x2_t v = vld1q_f64(row + 2 * j);
      acc[j] = vfmaq_f64(acc[j], v, v);
    }
  }
  for (std::size_t j = 0; j < kBlockWidth / 2; ++j) vst1q_f64(out + 2 * j, acc[j]);
}

}  // namespace cfronts::simd::detail

#endif
