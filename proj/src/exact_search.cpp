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

#include "mipscreen/exact_search.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mipscreen/error.hpp"
#include "mipscreen/simd/kernels.hpp"

namespace mipscreen {

namespace {

void check_query(VectorView context, const EmbeddingMatrix& candidates, const char* op) {
  if (candidates.empty()) {
    throw InvalidArgument(std::string(op) + ": empty candidate set");
  }
  if (context.size() != candidates.dim()) {
    throw InvalidArgument(std::string(op) + ": context has dimension " +
                          std::to_string(context.size()) + ", candidates have " +
                          std::to_string(candidates.dim()));
  }
}

}  // namespace

SearchResult exact_argmax(VectorView context, const EmbeddingMatrix& candidates) {
  check_query(context, candidates, "exact_argmax");
  const auto best = simd::kernels().argmax_rows(context.data(), candidates.data(),
                                                candidates.count(), candidates.dim());
  return {best.index, best.score};
}

std::vector<SearchResult> top_k(VectorView context, const EmbeddingMatrix& candidates,
                                std::size_t k) {
  check_query(context, candidates, "top_k");
  if (k < 1 || k > candidates.count()) {
    throw InvalidArgument("top_k: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(candidates.count()) + "]");
  }
  std::vector<double> scores(candidates.count());
  simd::kernels().dot_rows(context.data(), candidates.data(), candidates.count(),
                           candidates.dim(), scores.data());
  std::vector<std::size_t> order(candidates.count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto better = [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    better);
  std::vector<SearchResult> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({order[i], scores[order[i]]});
  return out;
}

std::vector<std::uint32_t> build_labels(const EmbeddingMatrix& contexts,
                                        const EmbeddingMatrix& candidates,
                                        std::size_t threads) {
  if (candidates.empty()) throw InvalidArgument("build_labels: empty candidate set");
  if (contexts.dim() != candidates.dim()) {
    throw InvalidArgument("build_labels: context/candidate dimension mismatch");
  }
  std::vector<std::uint32_t> labels(contexts.count());
  const auto& k = simd::kernels();
  parallel_for(contexts.count(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      labels[i] = static_cast<std::uint32_t>(
          k.argmax_rows(contexts.row(i).data(), candidates.data(), candidates.count(),
                        candidates.dim())
              .index);
    }
  });
  return labels;
}

}  // namespace mipscreen
