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

#include <atomic>

#include "emff/errors.hpp"

namespace emff {

void PairBatch::resize(std::size_t n) {
  n_ = n;
  for (int c = 0; c < 3; ++c) {
    mu_a[c].assign(n, 0.0);
    mu_b[c].assign(n, 0.0);
    r[c].assign(n, 0.0);
    force_a[c].assign(n, 0.0);
    torque_a[c].assign(n, 0.0);
    torque_b[c].assign(n, 0.0);
  }
}

PairBatchView PairBatch::view() {
  PairBatchView v;
  v.count = n_;
  for (int c = 0; c < 3; ++c) {
    v.mu_a[c] = mu_a[c].data();
    v.mu_b[c] = mu_b[c].data();
    v.r[c] = r[c].data();
    v.force_a[c] = force_a[c].data();
    v.torque_a[c] = torque_a[c].data();
    v.torque_b[c] = torque_b[c].data();
  }
  return v;
}

bool avx2_available() {
#if defined(EMFF_HAVE_AVX2_TU)
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {

std::atomic<PairKernelKind> g_override{PairKernelKind::kAuto};

PairKernelKind resolve(PairKernelKind kind) {
  if (kind == PairKernelKind::kAuto) {
    return avx2_available() ? PairKernelKind::kAvx2 : PairKernelKind::kScalar;
  }
  return kind;
}

}  // namespace

void set_pair_kernel(PairKernelKind kind) {
  if (kind == PairKernelKind::kAvx2 && !avx2_available()) {
    throw InvalidArgument("AVX2 pair kernel not available on this machine");
  }
  g_override.store(kind);
}

PairKernelKind active_pair_kernel() { return resolve(g_override.load()); }

const char* pair_kernel_name(PairKernelKind kind) {
  switch (resolve(kind)) {
    case PairKernelKind::kAvx2:
      return "avx2";
    default:
      return "scalar";
  }
}

void run_pair_kernel(const PairBatchView& batch, PairKernelKind kind) {
  kind = resolve(kind);
#if defined(EMFF_HAVE_AVX2_TU)
  if (kind == PairKernelKind::kAvx2) {
    if (!avx2_available()) throw InvalidArgument("AVX2 pair kernel not available on this machine");
    pair_kernel_avx2(batch);
    return;
  }
#else
  if (kind == PairKernelKind::kAvx2) {
    throw InvalidArgument("AVX2 pair kernel not compiled in");
  }
#endif
  pair_kernel_scalar(batch);
}

void run_pair_kernel(const PairBatchView& batch) { run_pair_kernel(batch, active_pair_kernel()); }

}  // namespace emff
