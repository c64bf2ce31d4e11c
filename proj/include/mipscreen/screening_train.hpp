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

// Alternating-minimisation trainer for the screening model:
//   init: centroids from spherical k-means on the contexts, subsets empty;
//   repeat T times:
//     (1) subsets <- closed-form minimiser with centroids fixed,
//     (2) centroids <- mini-batch SGD on the loss with subsets fixed.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mipscreen/screening.hpp"

namespace mipscreen {

struct SgdConfig {
  double learning_rate = 0.05;
  std::size_t epochs_per_alternation = 1;
  std::size_t batch_size = 256;
  std::uint64_t seed = 42;
};

struct TrainConfig {
  std::size_t k = 10;
  double lambda = 1e-6;
  std::size_t alternations = 10;  // T
  SgdConfig sgd;
  std::size_t kmeans_max_iters = 50;
  double kmeans_tol = 1e-4;
  std::size_t threads = 1;

  void validate() const;
};

struct AlternationRecord {
  double loss_before = 0.0;  // old subsets, current centroids
  double loss_after = 0.0;   // after the closed-form subset step
  std::size_t total_subset_size = 0;
};

struct TrainResult {
  ScreeningModel model;
  std::vector<AlternationRecord> history;
  std::size_t best_alternation = 0;
  double best_loss = 0.0;

  /// loss_after of every alternation, in order.
  std::vector<double> loss_trajectory() const;
};

/// Called around every subset step with the model before and after it
/// (same centroids, old and new subsets).
using SubsetStepObserver = std::function<void(std::size_t alternation,
                                              const ScreeningModel& before,
                                              const ScreeningModel& after)>;

/// Runs the trainer and returns the parameters with the lowest loss seen
/// right after a subset step. Deterministic given cfg.sgd.seed.
/// Throws InvalidArgument for M < K, an empty set, or a bad config.
TrainResult train_screening(const ScreeningTrainSet& data, const TrainConfig& cfg,
                            const SubsetStepObserver& observer = {});

}  // namespace mipscreen
