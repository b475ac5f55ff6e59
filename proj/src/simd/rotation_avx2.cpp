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

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace cfronts::simd::detail {

__attribute__((target("avx2,fma"))) void rotate_layer_avx2(
    double* block, const RotationLayer& layer) {
  static_assert(kBlockWidth == 8);
  for (std::size_t k = 0; k < layer.count; ++k) {
    double* x = block + layer.first[k] * kBlockWidth;
    double* y = block + layer.second[k] * kBlockWidth;
    const __m256d c = _mm256_set1_pd(layer.cos[k]);
    const __m256d s = _mm256_set1_pd(layer.sin[k]);
    const __m256d ns = _mm256_set1_pd(-layer.sin[k]);
    for (std::size_t j = 0; j < kBlockWidth; j += 4) {
      const __m256d xv = _mm256_loadu_pd(x + j);
      const __m256d yv = _mm256_loadu_pd(y + j);
      const __m256d xn = _mm256_fmadd_pd(c, xv, _mm256_mul_pd(s, yv));
      const __m256d yn = _mm256_fmadd_pd(ns, xv, _mm256_mul_pd(c, yv));
      _mm256_storeu_pd(x + j, xn);
      _mm256_storeu_pd(y + j, yn);
    }
  }
}

__attribute__((target("avx2,fma"))) void column_norms_avx2(
    const double* block, std::size_t rows, double* out) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = block + r * kBlockWidth;
    const __m256d a = _mm256_loadu_pd(row);
    const __m256d b = _mm256_loadu_pd(row + 4);
    lo = _mm256_fmadd_pd(a, a, lo);
    hi = _mm256_fmadd_pd(b, b, hi);
  }
  _mm256_storeu_pd(out, lo);
  _mm256_storeu_pd(out + 4, hi);
}

}  // namespace cfronts::simd::detail

#endif
