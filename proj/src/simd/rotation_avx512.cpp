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

__attribute__((target("avx512f"))) void rotate_layer_avx512(
    double* block, const RotationLayer& layer) {
  static_assert(kBlockWidth == 8);
  for (std::size_t k = 0; k < layer.count; ++k) {
    double* x = block + layer.first[k] * kBlockWidth;
    double* y = block + layer.second[k] * kBlockWidth;
    const __m512d c = _mm512_set1_pd(layer.cos[k]);
    const __m512d s = _mm512_set1_pd(layer.sin[k]);
    const __m512d ns = _mm512_set1_pd(-layer.sin[k]);
    const __m512d xv = _mm512_loadu_pd(x);
    const __m512d yv = _mm512_loadu_pd(y);
    _mm512_storeu_pd(x, _mm512_fmadd_pd(c, xv, _mm512_mul_pd(s, yv)));
    _mm512_storeu_pd(y, _mm512_fmadd_pd(ns, xv, _mm512_mul_pd(c, yv)));
  }
}

__attribute__((target("avx512f"))) void column_norms_avx512(
    const double* block, std::size_t rows, double* out) {
  __m512d acc = _mm512_setzero_pd();
  for (std::size_t r = 0; r < rows; ++r) {
    const __m512d a = _mm512_loadu_pd(block + r * kBlockWidth);
    acc = _mm512_fmadd_pd(a, a, acc);
  }
  _mm512_storeu_pd(out, acc);
}

}  // namespace cfronts::simd::detail

#endif
