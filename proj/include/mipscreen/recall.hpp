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

// Recall@1/N ranking protocol: the ground-truth response must outscore
// every one of its N-1 distractors. Ties with a distractor count as misses.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mipscreen/embedding.hpp"

namespace mipscreen {

struct RankingInstance {
  std::size_t context = 0;
  std::size_t ground_truth = 0;
  std::vector<std::size_t> distractors;
};

/// (context id, candidate id) -> score. Only comparisons of scores matter.
using PairScorer = std::function<double(std::size_t context, std::size_t candidate)>;

/// Fraction of instances whose ground truth scores strictly above all
/// distractors. Ids are validated against the given counts.
double recall_at_1(const PairScorer& scorer, std::span<const RankingInstance> instances,
                   std::size_t num_contexts, std::size_t num_candidates);

/// Same, scoring with the raw inner product of the embeddings.
double recall_at_1(const EmbeddingMatrix& contexts, const EmbeddingMatrix& candidates,
                   std::span<const RankingInstance> instances);

/// One instance per context i with ground truth ground_truth[i] and
/// candidates_per_instance - 1 distinct distractors drawn without
/// replacement from the remaining candidates. Sampled once, seeded.
std::vector<RankingInstance> make_ranking_instances(std::span<const std::size_t> ground_truth,
                                                    std::size_t num_candidates,
                                                    std::size_t candidates_per_instance,
                                                    std::uint64_t seed);

}  // namespace mipscreen
