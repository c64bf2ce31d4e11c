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

#include "mipscreen/screening_train.hpp"

#include <numeric>
#include <string>

#include "mipscreen/error.hpp"
#include "mipscreen/rng.hpp"
#include "mipscreen/spherical_kmeans.hpp"

namespace mipscreen {

void TrainConfig::validate() const {
  if (k < 1) throw InvalidArgument("K must be >= 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  if (alternations < 1) throw InvalidArgument("T must be >= 1");
  if (!(sgd.learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (sgd.batch_size < 1) throw InvalidArgument("batch size must be >= 1");
}

std::vector<double> TrainResult::loss_trajectory() const {
  std::vector<double> out;
  out.reserve(history.size());
  for (const auto& h : history) out.push_back(h.loss_after);
  return out;
}

namespace {

EmbeddingMatrix round_to_float(const Matrix& m) {
  EmbeddingMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.values().size(); ++i) {
    out.data()[i] = static_cast<float>(m.values()[i]);
  }
  return out;
}

}  // namespace

TrainResult train_screening(const ScreeningTrainSet& data, const TrainConfig& cfg,
                            const SubsetStepObserver& observer) {
  cfg.validate();
  data.validate();
  const std::size_t m = data.num_contexts();
  const std::size_t n = data.num_candidates();
  if (m < cfg.k) {
    throw InvalidArgument("need at least K=" + std::to_string(cfg.k) + " contexts, got " +
                          std::to_string(m));
  }

  KMeansConfig km;
  km.k = cfg.k;
  km.max_iters = cfg.kmeans_max_iters;
  km.tol = cfg.kmeans_tol;
  km.seed = derive_seed(cfg.sgd.seed, 1);
  km.threads = cfg.threads;
  Matrix centroids = to_matrix(spherical_kmeans(data.contexts, km).centroids);

  std::vector<BitSet> subsets(cfg.k, BitSet(n));
  CounterRng rng(derive_seed(cfg.sgd.seed, 2));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  bool have_best = false;
  for (std::size_t t = 0; t < cfg.alternations; ++t) {
    // (1) closed-form subset step on the float centroids that get saved.
    EmbeddingMatrix snapshot = round_to_float(centroids);
    const Matrix mu = soft_assign_all(data.contexts, snapshot, cfg.threads);
    const Matrix alpha = compute_alpha(mu, data.labels, n, cfg.lambda);

    AlternationRecord rec;
    rec.loss_before = loss_from_alpha(alpha, subsets, m);
    std::vector<BitSet> old_subsets = std::move(subsets);
    subsets = update_subsets(alpha);
    if (observer) {
      observer(t, ScreeningModel{snapshot, std::move(old_subsets), cfg.lambda},
               ScreeningModel{snapshot, subsets, cfg.lambda});
    }
    rec.loss_after = loss_from_alpha(alpha, subsets, m);
    for (const auto& s : subsets) rec.total_subset_size += s.count();
    result.history.push_back(rec);

    if (!have_best || rec.loss_after < result.best_loss) {
      have_best = true;
      result.best_loss = rec.loss_after;
      result.best_alternation = t;
      result.model.centroids = std::move(snapshot);
      result.model.subsets = subsets;
      result.model.lambda = cfg.lambda;
    }

    // (2) SGD on the centroids.
    for (std::size_t epoch = 0; epoch < cfg.sgd.epochs_per_alternation; ++epoch) {
      rng.shuffle(std::span<std::size_t>(order));
      for (std::size_t start = 0; start < m; start += cfg.sgd.batch_size) {
        const std::size_t end = std::min(m, start + cfg.sgd.batch_size);
        const std::span<const std::size_t> batch(order.data() + start, end - start);
        const Matrix grad =
            centroid_gradient(centroids, subsets, cfg.lambda, data.contexts, data.labels, batch);
        for (std::size_t i = 0; i < grad.values().size(); ++i) {
          centroids.values()[i] -= cfg.sgd.learning_rate * grad.values()[i];
        }
      }
    }
  }
  return result;
}

}  // namespace mipscreen
