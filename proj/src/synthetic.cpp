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

#include "mipscreen/synthetic.hpp"

#include <cmath>

#include "mipscreen/error.hpp"
#include "mipscreen/rng.hpp"

namespace mipscreen {

void SyntheticSpec::validate() const {
  if (d < 1) throw InvalidArgument("synthetic: d must be >= 1");
  if (topics < 1) throw InvalidArgument("synthetic: topics must be >= 1");
  if (n < topics) throw InvalidArgument("synthetic: n must be >= topics");
  if (m_train < topics) throw InvalidArgument("synthetic: m_train must be >= topics");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidArgument("synthetic: noise_sigma must be finite and >= 0");
  }
}

namespace {

enum Stream : std::uint64_t { kTopics = 1, kCandidates = 2, kTrain = 3, kTest = 4 };

CounterRng row_rng(std::uint64_t seed, Stream stream, std::size_t row) {
  return CounterRng(derive_seed(derive_seed(seed, stream), row));
}

void noisy_row(std::span<float> out, VectorView topic, double coord_sigma, CounterRng& rng) {
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = static_cast<float>(static_cast<double>(topic[c]) + coord_sigma * rng.normal());
  }
}

void fill_contexts(const SyntheticSpec& spec, const EmbeddingMatrix& topics, Stream stream,
                   std::size_t count, EmbeddingMatrix& rows, std::vector<std::uint32_t>& tags,
                   double coord_sigma) {
  rows = EmbeddingMatrix(count, spec.d);
  tags.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng = row_rng(spec.seed, stream, i);
    tags[i] = static_cast<std::uint32_t>(rng.below(spec.topics));
    noisy_row(rows.row(i), topics.row(tags[i]), coord_sigma, rng);
  }
}

}  // namespace

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticData out;
  out.topic_directions = EmbeddingMatrix(spec.topics, spec.d);
  for (std::size_t t = 0; t < spec.topics; ++t) {
    CounterRng rng = row_rng(spec.seed, kTopics, t);
    Vector raw(spec.d);
    double norm = 0.0;
    do {
      for (auto& v : raw) v = static_cast<float>(rng.normal());
      norm = l2_norm(raw);
    } while (!(norm > 0.0));
    const Vector unit = l2_normalize(raw);
    std::copy(unit.begin(), unit.end(), out.topic_directions.row(t).begin());
  }

  const double coord_sigma = spec.noise_sigma / std::sqrt(static_cast<double>(spec.d));

  out.candidates = EmbeddingMatrix(spec.n, spec.d);
  out.candidate_topics.resize(spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) {
    CounterRng rng = row_rng(spec.seed, kCandidates, j);
    out.candidate_topics[j] = static_cast<std::uint32_t>(j % spec.topics);
    noisy_row(out.candidates.row(j), out.topic_directions.row(out.candidate_topics[j]),
              coord_sigma, rng);
  }
  fill_contexts(spec, out.topic_directions, kTrain, spec.m_train, out.train_contexts,
                out.train_topics, coord_sigma);
  fill_contexts(spec, out.topic_directions, kTest, spec.m_test, out.test_contexts,
                out.test_topics, coord_sigma);
  return out;
}

}  // namespace mipscreen
