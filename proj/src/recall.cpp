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

#include "mipscreen/recall.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "mipscreen/error.hpp"
#include "mipscreen/rng.hpp"

namespace mipscreen {

namespace {

void validate(const RankingInstance& inst, std::size_t num_contexts,
              std::size_t num_candidates) {
  if (inst.context >= num_contexts) {
    throw InvalidArgument("ranking instance references context " +
                          std::to_string(inst.context) + " of " +
                          std::to_string(num_contexts));
  }
  if (inst.distractors.empty()) {
    throw InvalidArgument("ranking instance needs at least one distractor");
  }
  if (inst.ground_truth >= num_candidates) {
    throw InvalidArgument("ranking instance references candidate " +
                          std::to_string(inst.ground_truth) + " of " +
                          std::to_string(num_candidates));
  }
  for (std::size_t d : inst.distractors) {
    if (d >= num_candidates) {
      throw InvalidArgument("ranking instance references candidate " + std::to_string(d) +
                            " of " + std::to_string(num_candidates));
    }
    if (d == inst.ground_truth) {
      throw InvalidArgument("ground truth listed among distractors");
    }
  }
}

}  // namespace

double recall_at_1(const PairScorer& scorer, std::span<const RankingInstance> instances,
                   std::size_t num_contexts, std::size_t num_candidates) {
  if (instances.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& inst : instances) {
    validate(inst, num_contexts, num_candidates);
    const double truth = scorer(inst.context, inst.ground_truth);
    const bool wins = std::all_of(inst.distractors.begin(), inst.distractors.end(),
                                  [&](std::size_t d) { return truth > scorer(inst.context, d); });
    if (wins) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(instances.size());
}

double recall_at_1(const EmbeddingMatrix& contexts, const EmbeddingMatrix& candidates,
                   std::span<const RankingInstance> instances) {
  if (contexts.dim() != candidates.dim()) {
    throw InvalidArgument("recall_at_1: context/candidate dimension mismatch");
  }
  return recall_at_1(
      [&](std::size_t c, std::size_t r) {
        return inner_product(contexts.row(c), candidates.row(r));
      },
      instances, contexts.count(), candidates.count());
}

std::vector<RankingInstance> make_ranking_instances(std::span<const std::size_t> ground_truth,
                                                    std::size_t num_candidates,
                                                    std::size_t candidates_per_instance,
                                                    std::uint64_t seed) {
  if (candidates_per_instance < 2 || candidates_per_instance > num_candidates) {
    throw InvalidArgument("make_ranking_instances: need 2 <= N <= candidate count");
  }
  CounterRng rng(derive_seed(seed, 0x52414e4b));
  std::vector<RankingInstance> out;
  out.reserve(ground_truth.size());
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    if (ground_truth[i] >= num_candidates) {
      throw InvalidArgument("make_ranking_instances: ground truth out of range");
    }
    RankingInstance inst{i, ground_truth[i], {}};
    std::unordered_set<std::size_t> taken{ground_truth[i]};
    while (inst.distractors.size() + 1 < candidates_per_instance) {
      const auto d = static_cast<std::size_t>(rng.below(num_candidates));
      if (taken.insert(d).second) inst.distractors.push_back(d);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace mipscreen
