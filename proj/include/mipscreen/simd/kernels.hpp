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

#pragma once

// Inner-product kernels with a portable scalar reference and optional
// AVX2 / NEON variants picked at runtime.
//
// Every variant sums products in the same canonical order: eight strided
// lanes over full blocks of eight, the lanes folded as
//   ((l0+l4) + (l2+l6)) + ((l1+l5) + (l3+l7)),
// then the tail added in ascending order. float*float products are exact in
// double, so all variants return bit-identical results.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

namespace mipscreen::simd {

enum class Backend : std::uint8_t { kScalar, kAvx2, kNeon };

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct ArgMax {
  std::size_t index = kNoIndex;
  double score = -std::numeric_limits<double>::infinity();
};

struct KernelTable {
  Backend backend;
  double (*dot)(const float* a, const float* b, std::size_t n);
  void (*dot_rows)(const float* query, const float* rows, std::size_t count,
                   std::size_t dim, double* out);
  // Ties go to the lowest row index.
  ArgMax (*argmax_rows)(const float* query, const float* rows,
                        std::size_t count, std::size_t dim);
  // Only rows whose bit is set in `words` are scored. count bounds the rows.
  ArgMax (*argmax_masked)(const float* query, const float* rows,
                          std::size_t count, std::size_t dim,
                          const std::uint64_t* words);
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

bool backend_available(Backend backend);
std::string_view backend_name(Backend backend);

/// Table used by the library. Defaults to the widest available variant.
const KernelTable& kernels();
Backend active_backend();
/// Throws InvalidArgument if the backend is not available on this host.
void set_backend(Backend backend);

inline double dot(const float* a, const float* b, std::size_t n) {
  return kernels().dot(a, b, n);
}

}  // namespace mipscreen::simd
