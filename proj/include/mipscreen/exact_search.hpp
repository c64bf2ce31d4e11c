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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mipscreen/embedding.hpp"

namespace mipscreen {

/// One scored candidate. score is the raw inner product (pre-sigmoid).
struct SearchResult {
  std::size_t index = 0;
  double score = 0.0;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

/// Brute-force maximum inner product search. Ties go to the lowest index.
SearchResult exact_argmax(VectorView context, const EmbeddingMatrix& candidates);

/// The k best candidates by score, descending, index-ascending among equal
/// scores. Requires 1 <= k <= candidates.count().
std::vector<SearchResult> top_k(VectorView context, const EmbeddingMatrix& candidates,
                                std::size_t k);

/// labels[i] = exact_argmax(contexts.row(i), candidates).index.
std::vector<std::uint32_t> build_labels(const EmbeddingMatrix& contexts,
                                        const EmbeddingMatrix& candidates,
                                        std::size_t threads = 1);

}  // namespace mipscreen
