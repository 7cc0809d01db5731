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
#include "emff/pair_kernel.hpp"
#include "pair_math.hpp"

namespace emff {

void pair_kernel_scalar(const PairBatchView& b) {
  for (std::size_t i = 0; i < b.count; ++i) {
    const double ma[3] = {b.mu_a[0][i], b.mu_a[1][i], b.mu_a[2][i]};
    const double mb[3] = {b.mu_b[0][i], b.mu_b[1][i], b.mu_b[2][i]};
    const double r[3] = {b.r[0][i], b.r[1][i], b.r[2][i]};
    double f[3], ta[3], tb[3];
    detail::pair_eval(ma, mb, r, f, ta, tb);
    for (int c = 0; c < 3; ++c) {
      b.force_a[c][i] = f[c];
      b.torque_a[c][i] = ta[c];
      b.torque_b[c][i] = tb[c];
    }
  }
}

}  // namespace emff
