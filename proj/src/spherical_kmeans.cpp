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

#include "mipscreen/spherical_kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mipscreen/error.hpp"
#include "mipscreen/rng.hpp"
#include "mipscreen/simd/kernels.hpp"

namespace mipscreen {

namespace {

EmbeddingMatrix normalized_copy(const EmbeddingMatrix& points) {
  EmbeddingMatrix out(points.count(), points.dim());
  for (std::size_t i = 0; i < points.count(); ++i) {
    const double norm = l2_norm(points.row(i));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw InvalidArgument("spherical_kmeans: point " + std::to_string(i) +
                            " has zero or non-finite norm");
    }
    auto dst = out.row(i);
    const auto src = points.row(i);
    for (std::size_t d = 0; d < src.size(); ++d) {
      dst[d] = static_cast<float>(static_cast<double>(src[d]) / norm);
    }
  }
  return out;
}

// k-means++ with distance 1 - cos.
EmbeddingMatrix seed_centroids(const EmbeddingMatrix& unit, std::size_t k, CounterRng& rng) {
  const std::size_t n = unit.count();
  EmbeddingMatrix centroids(k, unit.dim());
  std::vector<double> best_cos(n, -std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);

  auto take = [&](std::size_t c, std::size_t p) {
    chosen[p] = true;
    std::copy_n(unit.row(p).data(), unit.dim(), centroids.row(c).data());
    for (std::size_t i = 0; i < n; ++i) {
      best_cos[i] = std::max(best_cos[i], inner_product(unit.row(i), unit.row(p)));
    }
  };

  take(0, static_cast<std::size_t>(rng.below(n)));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) total += std::max(0.0, 1.0 - best_cos[i]);
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        const double w = std::max(0.0, 1.0 - best_cos[i]);
        if (w <= 0.0) continue;
        pick = i;
        target -= w;
        if (target < 0.0) break;
      }
    }
    if (pick == n) {
      // Every remaining point coincides with a chosen centroid.
      std::size_t remaining = 0;
      for (std::size_t i = 0; i < n; ++i) remaining += chosen[i] ? 0 : 1;
      std::size_t r = static_cast<std::size_t>(rng.below(remaining));
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        if (r-- == 0) {
          pick = i;
          break;
        }
      }
    }
    take(c, pick);
  }
  return centroids;
}

// Returns the objective (sum of best cosines).
double assign_all(const EmbeddingMatrix& unit, const EmbeddingMatrix& centroids,
                  std::vector<std::uint32_t>& assignment, std::vector<double>& cosines,
                  std::size_t threads) {
  const auto& kern = simd::kernels();
  parallel_for(unit.count(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto best =
          kern.argmax_rows(unit.row(i).data(), centroids.data(), centroids.count(), unit.dim());
      assignment[i] = static_cast<std::uint32_t>(best.index);
      cosines[i] = best.score;
    }
  });
  double total = 0.0;
  for (double c : cosines) total += c;
  return total;
}

// Moves the worst-fitting point of a multi-member cluster into each empty
// cluster. Returns true if anything changed.
bool repair_empty(const EmbeddingMatrix& unit, EmbeddingMatrix& centroids,
                  std::vector<std::uint32_t>& assignment, std::vector<double>& cosines) {
  const std::size_t k = centroids.count();
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignment) ++sizes[a];
  bool changed = false;
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t worst = unit.count();
    for (std::size_t i = 0; i < unit.count(); ++i) {
      if (sizes[assignment[i]] < 2) continue;
      if (worst == unit.count() || cosines[i] < cosines[worst]) worst = i;
    }
    if (worst == unit.count()) break;  // cannot happen while k <= n
    --sizes[assignment[worst]];
    ++sizes[c];
    assignment[worst] = static_cast<std::uint32_t>(c);
    std::copy_n(unit.row(worst).data(), unit.dim(), centroids.row(c).data());
    cosines[worst] = inner_product(unit.row(worst), centroids.row(c));
    changed = true;
  }
  return changed;
}

void update_centroids(const EmbeddingMatrix& unit, const std::vector<std::uint32_t>& assignment,
                      EmbeddingMatrix& centroids) {
  const std::size_t k = centroids.count();
  const std::size_t dim = unit.dim();
  std::vector<double> sums(k * dim, 0.0);
  for (std::size_t i = 0; i < unit.count(); ++i) {
    const auto row = unit.row(i);
    double* dst = sums.data() + assignment[i] * dim;
    for (std::size_t d = 0; d < dim; ++d) dst[d] += row[d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    const double* s = sums.data() + c * dim;
    double norm2 = 0.0;
    for (std::size_t d = 0; d < dim; ++d) norm2 += s[d] * s[d];
    // Antipodal members can cancel exactly; keep the previous direction.
    if (!(norm2 > 0.0)) continue;
    const double norm = std::sqrt(norm2);
    auto dst = centroids.row(c);
    for (std::size_t d = 0; d < dim; ++d) dst[d] = static_cast<float>(s[d] / norm);
  }
}

}  // namespace

KMeansResult spherical_kmeans(const EmbeddingMatrix& points, const KMeansConfig& cfg) {
  if (cfg.k < 1 || cfg.k > points.count()) {
    throw InvalidArgument("spherical_kmeans: K=" + std::to_string(cfg.k) +
                          " must lie in [1, " + std::to_string(points.count()) + "]");
  }
  if (cfg.max_iters < 1) throw InvalidArgument("spherical_kmeans: max_iters must be >= 1");
  if (!(cfg.tol >= 0.0)) throw InvalidArgument("spherical_kmeans: tol must be >= 0");

  const EmbeddingMatrix unit = normalized_copy(points);
  CounterRng rng(derive_seed(cfg.seed, 0x4b4d454e));

  KMeansResult result;
  result.centroids = seed_centroids(unit, cfg.k, rng);
  result.assignment.assign(unit.count(), 0);
  std::vector<double> cosines(unit.count(), 0.0);

  EmbeddingMatrix previous;
  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    assign_all(unit, result.centroids, result.assignment, cosines, cfg.threads);
    repair_empty(unit, result.centroids, result.assignment, cosines);
    previous = result.centroids;
    update_centroids(unit, result.assignment, result.centroids);
    ++result.iterations;

    double movement = 0.0;
    for (std::size_t c = 0; c < cfg.k; ++c) {
      double m2 = 0.0;
      for (std::size_t d = 0; d < unit.dim(); ++d) {
        const double diff = static_cast<double>(result.centroids.row(c)[d]) - previous.row(c)[d];
        m2 += diff * diff;
      }
      movement += std::sqrt(m2);
    }
    movement /= static_cast<double>(cfg.k);

    result.objective.push_back(
        assign_all(unit, result.centroids, result.assignment, cosines, cfg.threads));
    if (movement < cfg.tol) break;
  }

  // Final assignment must leave no cluster empty; reseeding can pull other
  // points over, so iterate until stable.
  for (std::size_t guard = 0; guard <= cfg.k; ++guard) {
    if (!repair_empty(unit, result.centroids, result.assignment, cosines)) break;
    assign_all(unit, result.centroids, result.assignment, cosines, cfg.threads);
  }
  return result;
}

std::size_t hard_assign(VectorView point, const EmbeddingMatrix& centroids) {
  if (centroids.empty()) throw InvalidArgument("hard_assign: empty centroid set");
  if (point.size() != centroids.dim()) {
    throw InvalidArgument("hard_assign: dimension mismatch");
  }
  return simd::kernels()
      .argmax_rows(point.data(), centroids.data(), centroids.count(), centroids.dim())
      .index;
}

}  // namespace mipscreen
