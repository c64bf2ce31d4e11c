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

// Shared fixtures and independent reference implementations for tests.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mipscreen/bitset.hpp"
#include "mipscreen/embedding.hpp"
#include "mipscreen/rng.hpp"
#include "mipscreen/screening.hpp"

namespace mipscreen::testing {

inline EmbeddingMatrix random_matrix(std::size_t count, std::size_t dim, std::uint64_t seed,
                                     double scale = 1.0) {
  CounterRng rng(seed);
  std::vector<float> v(count * dim);
  for (auto& x : v) x = static_cast<float>(scale * rng.normal());
  return EmbeddingMatrix(count, dim, std::move(v));
}

inline std::vector<BitSet> random_subsets(std::size_t k, std::size_t n, std::uint64_t seed,
                                          double density = 0.5) {
  CounterRng rng(seed);
  std::vector<BitSet> out(k, BitSet(n));
  for (auto& s : out) {
    for (std::size_t j = 0; j < n; ++j) s.set(j, rng.uniform() < density);
  }
  return out;
}

inline std::vector<std::uint32_t> random_labels(std::size_t m, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<std::uint32_t> out(m);
  for (auto& y : out) y = static_cast<std::uint32_t>(rng.below(n));
  return out;
}

inline double ref_dot(VectorView a, VectorView b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += static_cast<double>(a[d]) * b[d];
  return s;
}

/// Plain double loop, first maximum wins.
inline std::size_t ref_argmax(VectorView q, const EmbeddingMatrix& rows) {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < rows.count(); ++j) {
    const double s = ref_dot(q, rows.row(j));
    if (s > best_score) {
      best_score = s;
      best = j;
    }
  }
  return best;
}

/// Softmax written directly from its definition (no max shift).
inline std::vector<double> ref_softmax(VectorView c, const EmbeddingMatrix& centroids) {
  std::vector<double> mu(centroids.count());
  double z = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    mu[k] = std::exp(ref_dot(c, centroids.row(k)));
    z += mu[k];
  }
  for (auto& m : mu) m /= z;
  return mu;
}

/// Loss over every (context, candidate) pair, straight from the pair loss.
inline double ref_pair_loss_total(const EmbeddingMatrix& contexts,
                                  const EmbeddingMatrix& centroids,
                                  const std::vector<BitSet>& subsets,
                                  const std::vector<std::uint32_t>& labels, double lambda) {
  const std::size_t n = subsets.front().size();
  double total = 0.0;
  for (std::size_t i = 0; i < contexts.count(); ++i) {
    const auto mu = ref_softmax(contexts.row(i), centroids);
    for (std::size_t j = 0; j < n; ++j) {
      double p = 0.0;
      for (std::size_t k = 0; k < mu.size(); ++k) p += subsets[k].test(j) ? mu[k] : 0.0;
      total += labels[i] == j ? 1.0 - p : lambda * p;
    }
  }
  return total;
}

/// Same loss from a precomputed soft-assignment matrix (M x K).
inline double ref_loss_given_mu(const Matrix& mu, const std::vector<BitSet>& subsets,
                                const std::vector<std::uint32_t>& labels, double lambda) {
  const std::size_t n = subsets.front().size();
  double total = 0.0;
  for (std::size_t i = 0; i < mu.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double p = 0.0;
      for (std::size_t k = 0; k < mu.cols(); ++k) p += subsets[k].test(j) ? mu(i, k) : 0.0;
      total += labels[i] == j ? 1.0 - p : lambda * p;
    }
  }
  return total;
}

/// Minimum of loss(subsets) over all 2^(K*N) assignments, by enumeration.
/// Writes one minimiser to `best` when given.
template <class Loss>
double brute_force_min(std::size_t k_count, std::size_t n, Loss&& loss,
                       std::vector<BitSet>* best = nullptr) {
  const std::size_t bits = k_count * n;
  double min_loss = std::numeric_limits<double>::infinity();
  std::vector<BitSet> subsets(k_count, BitSet(n));
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
    for (std::size_t b = 0; b < bits; ++b) subsets[b / n].set(b % n, (code >> b) & 1U);
    const double value = loss(subsets);
    if (value < min_loss) {
      min_loss = value;
      if (best) *best = subsets;
    }
  }
  return min_loss;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace mipscreen::testing
