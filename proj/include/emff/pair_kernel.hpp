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

#include <cstddef>
#include <vector>

namespace emff {

// Structure-of-arrays batch of dipole pairs (a, b) with r = r_a - r_b.
// Outputs: force on a due to b, torque on a due to b, torque on b due to a.
// The force on b is the negated force on a.
struct PairBatchView {
  std::size_t count = 0;
  const double* mu_a[3] = {nullptr, nullptr, nullptr};
  const double* mu_b[3] = {nullptr, nullptr, nullptr};
  const double* r[3] = {nullptr, nullptr, nullptr};
  double* force_a[3] = {nullptr, nullptr, nullptr};
  double* torque_a[3] = {nullptr, nullptr, nullptr};
  double* torque_b[3] = {nullptr, nullptr, nullptr};
};

// Owning storage with the same layout.
struct PairBatch {
  explicit PairBatch(std::size_t n = 0) { resize(n); }
  void resize(std::size_t n);
  std::size_t size() const { return n_; }
  PairBatchView view();

  std::vector<double> mu_a[3];
  std::vector<double> mu_b[3];
  std::vector<double> r[3];
  std::vector<double> force_a[3];
  std::vector<double> torque_a[3];
  std::vector<double> torque_b[3];

 private:
  std::size_t n_ = 0;
};

enum class PairKernelKind { kAuto, kScalar, kAvx2 };

using PairKernelFn = void (*)(const PairBatchView&);

void pair_kernel_scalar(const PairBatchView& batch);
#if defined(EMFF_HAVE_AVX2_TU)
void pair_kernel_avx2(const PairBatchView& batch);
#endif

bool avx2_available();
// Forces a kernel for tests and benchmarks; kAuto restores runtime selection.
// Requesting kAvx2 on a machine without it throws InvalidArgument.
void set_pair_kernel(PairKernelKind kind);
PairKernelKind active_pair_kernel();
const char* pair_kernel_name(PairKernelKind kind);

// Runs the selected kernel.
void run_pair_kernel(const PairBatchView& batch);
void run_pair_kernel(const PairBatchView& batch, PairKernelKind kind);

}  // namespace emff
