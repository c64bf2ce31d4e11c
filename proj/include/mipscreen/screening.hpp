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

// Learned candidate screening: K context-cluster centroids, each paired with
// a binary subset of the N response candidates. A query is hard-assigned to
// the centroid with the largest inner product and only that cluster's subset
// is searched exactly.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mipscreen/bitset.hpp"
#include "mipscreen/embedding.hpp"
#include "mipscreen/exact_search.hpp"

namespace mipscreen {

struct ScreeningModel {
  EmbeddingMatrix centroids;    // K x D
  std::vector<BitSet> subsets;  // K bit vectors of length N
  double lambda = 1e-6;

  std::size_t num_clusters() const { return centroids.count(); }
  std::size_t dim() const { return centroids.dim(); }
  std::size_t num_candidates() const { return subsets.empty() ? 0 : subsets.front().size(); }

  /// Throws InvalidArgument unless K >= 1, N >= 1, 0 < lambda < 1, one
  /// subset per centroid of equal length, and finite centroids.
  void validate() const;

  friend bool operator==(const ScreeningModel&, const ScreeningModel&) = default;
};

/// Contexts, candidates and the exact-search label of every context.
struct ScreeningTrainSet {
  EmbeddingMatrix contexts;
  EmbeddingMatrix candidates;
  std::vector<std::uint32_t> labels;

  /// Labels every context with build_labels().
  static ScreeningTrainSet from_embeddings(EmbeddingMatrix contexts, EmbeddingMatrix candidates,
                                           std::size_t threads = 1);

  std::size_t num_contexts() const { return contexts.count(); }
  std::size_t num_candidates() const { return candidates.count(); }

  /// Shapes and label range; does not recompute the oracle.
  void validate() const;
};

// --- soft model -----------------------------------------------------------

/// Softmax over inner products with the centroids (max-shifted). Entries are
/// strictly positive and sum to one.
std::vector<double> soft_assign(VectorView context, const EmbeddingMatrix& centroids);

/// M x K matrix of soft assignments, one row per context.
Matrix soft_assign_all(const EmbeddingMatrix& contexts, const EmbeddingMatrix& centroids,
                       std::size_t threads = 1);

/// p = sum_k mu[k] * subsets[k][j].
double retrieve_prob(std::span<const double> mu, std::span<const BitSet> subsets,
                     std::size_t candidate);

/// Per-pair loss: lambda * p when the candidate is not the label,
/// 1 - p when it is.
double pair_loss(double p, bool is_label, double lambda);

/// Sum of pair_loss over every (context, candidate) pair.
double total_loss(const ScreeningModel& model, const ScreeningTrainSet& data);

/// alpha[k][j] = sum_i mu[i][k] * (lambda - (lambda + 1) * y[i][j]), where y
/// is the one-hot label matrix. K x N.
Matrix compute_alpha(const Matrix& mu, std::span<const std::uint32_t> labels,
                     std::size_t num_candidates, double lambda);

/// The loss written in terms of the coefficients:
/// sum_k sum_j alpha[k][j] * s_k[j] + (number of contexts).
/// Terms are added in (k, j) order.
double loss_from_alpha(const Matrix& alpha, std::span<const BitSet> subsets,
                       std::size_t num_contexts);

/// s_k[j] = 1 iff alpha[k][j] <= 0. Exact minimiser of the loss over all
/// binary subsets with the centroids fixed.
std::vector<BitSet> update_subsets(const Matrix& alpha);

/// Gradient of sum over `batch` of sum_j pair_loss with respect to every
/// centroid entry (K x D), subsets fixed.
Matrix centroid_gradient(const Matrix& centroids, std::span<const BitSet> subsets,
                         double lambda, const EmbeddingMatrix& contexts,
                         std::span<const std::uint32_t> labels,
                         std::span<const std::size_t> batch);

Matrix centroid_gradient(const ScreeningModel& model, const ScreeningTrainSet& data,
                         std::span<const std::size_t> batch);

Matrix to_matrix(const EmbeddingMatrix& m);

// --- inference ------------------------------------------------------------

/// Hard-assigned cluster of a query.
std::size_t assign_cluster(VectorView context, const ScreeningModel& model);

/// Number of candidates a query will be scored against (N on fallback).
std::size_t predicted_size(VectorView context, const ScreeningModel& model);

/// Candidate ids of the predicted subset, ascending. An empty cluster subset
/// falls back to all N candidates.
std::vector<std::size_t> predict_subset(VectorView context, const ScreeningModel& model);

/// Exact MIPS restricted to the predicted subset; ties go to the lowest id.
SearchResult screened_search(VectorView context, const ScreeningModel& model,
                             const EmbeddingMatrix& candidates);

}  // namespace mipscreen
