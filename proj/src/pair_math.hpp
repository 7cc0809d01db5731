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
#pragma once

#include <cmath>

namespace emff::detail {

// mu0 / (4 pi), exact.
constexpr double kMuOver4Pi = 1.0e-7;

// Scalar reference for one pair. Field of b at a, force on a, torques on a and b.
inline void pair_eval(const double ma[3], const double mb[3], const double r[3], double f[3],
                      double ta[3], double tb[3]) {
  const double r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
  const double inv_r = 1.0 / std::sqrt(r2);
  const double inv_r2 = inv_r * inv_r;
  const double inv_r3 = inv_r2 * inv_r;
  const double inv_r5 = inv_r3 * inv_r2;
  const double ma_r = ma[0] * r[0] + ma[1] * r[1] + ma[2] * r[2];
  const double mb_r = mb[0] * r[0] + mb[1] * r[1] + mb[2] * r[2];
  const double ab = ma[0] * mb[0] + ma[1] * mb[1] + ma[2] * mb[2];

  const double cf = 3.0 * kMuOver4Pi * inv_r5;
  const double radial = ab - 5.0 * ma_r * mb_r * inv_r2;
  double bb[3];
  double ba[3];
  for (int i = 0; i < 3; ++i) {
    f[i] = cf * (radial * r[i] + mb_r * ma[i] + ma_r * mb[i]);
    bb[i] = kMuOver4Pi * (3.0 * mb_r * inv_r5 * r[i] - inv_r3 * mb[i]);
    ba[i] = kMuOver4Pi * (3.0 * ma_r * inv_r5 * r[i] - inv_r3 * ma[i]);
  }
  ta[0] = ma[1] * bb[2] - ma[2] * bb[1];
  ta[1] = ma[2] * bb[0] - ma[0] * bb[2];
  ta[2] = ma[0] * bb[1] - ma[1] * bb[0];
  tb[0] = mb[1] * ba[2] - mb[2] * ba[1];
  tb[1] = mb[2] * ba[0] - mb[0] * ba[2];
  tb[2] = mb[0] * ba[1] - mb[1] * ba[0];
}

}  // namespace emff::detail
