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

// Shared row loops; each backend TU includes this after defining its
// inline dot routine so the loops get inlined per instruction set.

#include <bit>

#include "mipscreen/simd/kernels.hpp"

namespace mipscreen::simd::detail {

template <double (*Dot)(const float*, const float*, std::size_t)>
struct RowLoops {
  static void dot_rows(const float* query, const float* rows, std::size_t count,
                       std::size_t dim, double* out) {
    for (std::size_t r = 0; r < count; ++r) {
      out[r] = Dot(query, rows + r * dim, dim);
    }
  }

  static ArgMax argmax_rows(const float* query, const float* rows,
                            std::size_t count, std::size_t dim) {
    ArgMax best;
    for (std::size_t r = 0; r < count; ++r) {
      const double s = Dot(query, rows + r * dim, dim);
      if (best.index == kNoIndex || s > best.score) {
        best.index = r;
        best.score = s;
      }
    }
    return best;
  }

  static ArgMax argmax_masked(const float* query, const float* rows,
                              std::size_t count, std::size_t dim,
                              const std::uint64_t* words) {
    ArgMax best;
    const std::size_t num_words = (count + 63) / 64;
    for (std::size_t w = 0; w < num_words; ++w) {
      std::uint64_t bits = words[w];
      while (bits != 0) {
        const std::size_t r = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
        bits &= bits - 1;
        if (r >= count) break;
        const double s = Dot(query, rows + r * dim, dim);
        if (best.index == kNoIndex || s > best.score) {
          best.index = r;
          best.score = s;
        }
      }
    }
    return best;
  }
};

}  // namespace mipscreen::simd::detail
