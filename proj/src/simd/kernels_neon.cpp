// Copyright 2026 The mipscreen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <arm_neon.h>

#include "kernels_common.hpp"

namespace mipscreen::simd {

namespace {

inline double dot_neon(const float* a, const float* b, std::size_t n) {
  float64x2_t l01 = vdupq_n_f64(0.0);
  float64x2_t l23 = vdupq_n_f64(0.0);
  float64x2_t l45 = vdupq_n_f64(0.0);
  float64x2_t l67 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const float32x4_t a0 = vld1q_f32(a + i);
    const float32x4_t a1 = vld1q_f32(a + i + 4);
    const float32x4_t b0 = vld1q_f32(b + i);
    const float32x4_t b1 = vld1q_f32(b + i + 4);
    l01 = vaddq_f64(l01, vmulq_f64(vcvt_f64_f32(vget_low_f32(a0)), vcvt_f64_f32(vget_low_f32(b0))));
    l23 = vaddq_f64(l23, vmulq_f64(vcvt_high_f64_f32(a0), vcvt_high_f64_f32(b0)));
    l45 = vaddq_f64(l45, vmulq_f64(vcvt_f64_f32(vget_low_f32(a1)), vcvt_f64_f32(vget_low_f32(b1))));
    l67 = vaddq_f64(l67, vmulq_f64(vcvt_high_f64_f32(a1), vcvt_high_f64_f32(b1)));
  }
  const float64x2_t v01 = vaddq_f64(l01, l45);
  const float64x2_t v23 = vaddq_f64(l23, l67);
  const float64x2_t s = vaddq_f64(v01, v23);
  double total = vgetq_lane_f64(s, 0) + vgetq_lane_f64(s, 1);
  for (; i < n; ++i) {
    total += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return total;
}

using Loops = detail::RowLoops<dot_neon>;

const KernelTable kNeonTable{Backend::kNeon, dot_neon, Loops::dot_rows,
                             Loops::argmax_rows, Loops::argmax_masked};

}  // namespace

const KernelTable* neon_kernels() { return &kNeonTable; }

}  // namespace mipscreen::simd
