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

// Seeded topic-structured embeddings used in place of real corpora.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mipscreen/embedding.hpp"

namespace mipscreen {

struct SyntheticSpec {
  std::size_t m_train = 5000;
  std::size_t m_test = 500;
  std::size_t n = 1000;
  std::size_t d = 16;
  std::size_t topics = 20;
  /// Expected L2 norm of the additive noise; each coordinate has standard
  /// deviation noise_sigma / sqrt(d).
  double noise_sigma = 0.3;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SyntheticData {
  EmbeddingMatrix train_contexts;
  EmbeddingMatrix test_contexts;
  EmbeddingMatrix candidates;
  std::vector<std::uint32_t> train_topics;
  std::vector<std::uint32_t> test_topics;
  std::vector<std::uint32_t> candidate_topics;  // candidate j has topic j % topics
  EmbeddingMatrix topic_directions;             // unit rows
};

/// Each row is its topic direction plus isotropic Gaussian noise. Every row
/// draws from its own counter stream, so the output does not depend on
/// generation order.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

}  // namespace mipscreen
