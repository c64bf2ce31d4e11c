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

#include "kernels_common.hpp"

namespace mipscreen::simd {

namespace {

inline double dot_scalar(const float* a, const float* b, std::size_t n) {
  double lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) {
      lane[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
    }
  }
  const double v0 = lane[0] + lane[4];
  const double v1 = lane[1] + lane[5];
  const double v2 = lane[2] + lane[6];
  const double v3 = lane[3] + lane[7];
  double total = (v0 + v2) + (v1 + v3);
  for (; i < n; ++i) {
    total += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return total;
}

using Loops = detail::RowLoops<dot_scalar>;

const KernelTable kScalarTable{Backend::kScalar, dot_scalar, Loops::dot_rows,
                               Loops::argmax_rows, Loops::argmax_masked};

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

}  // namespace mipscreen::simd
