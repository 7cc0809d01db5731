// Copyright 2026 The EMFF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <immintrin.h>

#include "emff/pair_kernel.hpp"
#include "pair_math.hpp"

namespace emff {

namespace {

struct V3 {
  __m256d x, y, z;
};

inline V3 load3(const double* const p[3], std::size_t i) {
  return {_mm256_loadu_pd(p[0] + i), _mm256_loadu_pd(p[1] + i), _mm256_loadu_pd(p[2] + i)};
}

inline void store3(double* const p[3], std::size_t i, const V3& v) {
  _mm256_storeu_pd(p[0] + i, v.x);
  _mm256_storeu_pd(p[1] + i, v.y);
  _mm256_storeu_pd(p[2] + i, v.z);
}

inline __m256d dot(const V3& a, const V3& b) {
  return _mm256_fmadd_pd(a.z, b.z, _mm256_fmadd_pd(a.y, b.y, _mm256_mul_pd(a.x, b.x)));
}

inline V3 cross(const V3& a, const V3& b) {
  return {_mm256_fmsub_pd(a.y, b.z, _mm256_mul_pd(a.z, b.y)),
          _mm256_fmsub_pd(a.z, b.x, _mm256_mul_pd(a.x, b.z)),
          _mm256_fmsub_pd(a.x, b.y, _mm256_mul_pd(a.y, b.x))};
}

// k * (s * r - t * m)
inline V3 field(__m256d k, __m256d s, const V3& r, __m256d t, const V3& m) {
  return {_mm256_mul_pd(k, _mm256_fmsub_pd(s, r.x, _mm256_mul_pd(t, m.x))),
          _mm256_mul_pd(k, _mm256_fmsub_pd(s, r.y, _mm256_mul_pd(t, m.y))),
          _mm256_mul_pd(k, _mm256_fmsub_pd(s, r.z, _mm256_mul_pd(t, m.z)))};
}

}  // namespace

void pair_kernel_avx2(const PairBatchView& b) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d three = _mm256_set1_pd(3.0);
  const __m256d five = _mm256_set1_pd(5.0);
  const __m256d k = _mm256_set1_pd(detail::kMuOver4Pi);
  const __m256d k3 = _mm256_set1_pd(3.0 * detail::kMuOver4Pi);
  std::size_t i = 0;
  for (; i + 4 <= b.count; i += 4) {
    const V3 ma = load3(b.mu_a, i);
    const V3 mb = load3(b.mu_b, i);
    const V3 r = load3(b.r, i);
    const __m256d r2 = dot(r, r);
    const __m256d inv_r = _mm256_div_pd(one, _mm256_sqrt_pd(r2));
    const __m256d inv_r2 = _mm256_mul_pd(inv_r, inv_r);
    const __m256d inv_r3 = _mm256_mul_pd(inv_r2, inv_r);
    const __m256d inv_r5 = _mm256_mul_pd(inv_r3, inv_r2);
    const __m256d ma_r = dot(ma, r);
    const __m256d mb_r = dot(mb, r);
    const __m256d ab = dot(ma, mb);

    const __m256d cf = _mm256_mul_pd(k3, inv_r5);
    const __m256d radial =
        _mm256_fnmadd_pd(_mm256_mul_pd(five, _mm256_mul_pd(ma_r, mb_r)), inv_r2, ab);
    V3 f;
    f.x = _mm256_mul_pd(cf, _mm256_fmadd_pd(radial, r.x, _mm256_fmadd_pd(mb_r, ma.x, _mm256_mul_pd(ma_r, mb.x))));
    f.y = _mm256_mul_pd(cf, _mm256_fmadd_pd(radial, r.y, _mm256_fmadd_pd(mb_r, ma.y, _mm256_mul_pd(ma_r, mb.y))));
    f.z = _mm256_mul_pd(cf, _mm256_fmadd_pd(radial, r.z, _mm256_fmadd_pd(mb_r, ma.z, _mm256_mul_pd(ma_r, mb.z))));

    const V3 bb = field(k, _mm256_mul_pd(three, _mm256_mul_pd(mb_r, inv_r5)), r, inv_r3, mb);
    const V3 ba = field(k, _mm256_mul_pd(three, _mm256_mul_pd(ma_r, inv_r5)), r, inv_r3, ma);

    store3(b.force_a, i, f);
    store3(b.torque_a, i, cross(ma, bb));
    store3(b.torque_b, i, cross(mb, ba));
  }
  if (i < b.count) {
    PairBatchView tail = b;
    tail.count = b.count - i;
    for (int c = 0; c < 3; ++c) {
      tail.mu_a[c] += i;
      tail.mu_b[c] += i;
      tail.r[c] += i;
      tail.force_a[c] += i;
      tail.torque_a[c] += i;
      tail.torque_b[c] += i;
    }
    pair_kernel_scalar(tail);
  }
}

}  // namespace emff
