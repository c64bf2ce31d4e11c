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

struct KMeansConfig {
  std::size_t k = 1;
  std::size_t max_iters = 50;
  std::uint64_t seed = 42;
  /// Stop once the mean centroid movement (L2) drops below this.
  double tol = 1e-4;
  std::size_t threads = 1;
};

struct KMeansResult {
  EmbeddingMatrix centroids;  // k unit-norm rows
  std::vector<std::uint32_t> assignment;
  /// Sum of cosine similarities to the assigned centroid, one entry per
  /// completed iteration. Non-decreasing.
  std::vector<double> objective;
  std::size_t iterations = 0;
};

/// Spherical k-means on the L2-normalized points with seeded k-means++
/// seeding. Empty clusters are reseeded with the point farthest from its
/// own centroid, so every returned centroid owns at least one point.
/// Throws InvalidArgument for k outside [1, points] or a zero-norm point.
KMeansResult spherical_kmeans(const EmbeddingMatrix& points, const KMeansConfig& cfg);

/// argmax_k inner_product(point, centroids[k]); ties to the lowest k.
std::size_t hard_assign(VectorView point, const EmbeddingMatrix& centroids);

}  // namespace mipscreen
