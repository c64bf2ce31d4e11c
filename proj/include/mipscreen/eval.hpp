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

// Screening quality metrics, the K x lambda sweep, and latency benchmarks.
//
// accuracy: fraction of held-out contexts whose exact-search winner lies in
//           the predicted subset (fallback to the full set counts as a hit).
// speedup:  N / mean predicted subset size (fallback counts as size N).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mipscreen/embedding.hpp"
#include "mipscreen/screening.hpp"
#include "mipscreen/screening_train.hpp"

namespace mipscreen {

struct TimingStats {
  double mean_ns = 0.0;
  double p50_ns = 0.0;
  double p99_ns = 0.0;
  std::size_t queries = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  double speedup_ratio = 1.0;
  double mean_subset_size = 0.0;
  /// Fraction of contexts where screened_search returned the exact winner.
  double top1_agreement = 0.0;
  std::size_t fallback_count = 0;
  std::size_t num_contexts = 0;
  std::size_t num_candidates = 0;
  std::optional<double> recall_at_1;
  std::optional<TimingStats> timing;
  std::vector<double> loss_trajectory;
};

double screening_accuracy(const ScreeningModel& model, const EmbeddingMatrix& contexts,
                          const EmbeddingMatrix& candidates, std::size_t threads = 1);

double mean_subset_size(const ScreeningModel& model, const EmbeddingMatrix& contexts);

double speedup_ratio(const ScreeningModel& model, const EmbeddingMatrix& contexts);

/// All metrics in one pass. Also checks that screened search returns the
/// exact winner on exactly the contexts whose winner is in the subset and
/// throws std::logic_error otherwise.
EvalReport evaluate_screening(const ScreeningModel& model, const EmbeddingMatrix& contexts,
                              const EmbeddingMatrix& candidates, std::size_t threads = 1);

struct GridCell {
  std::size_t k = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double accuracy = 0.0;
  double speedup = 0.0;
  double mean_subset = 0.0;
  double train_loss = 0.0;
};

/// Trains and evaluates one model per (K, lambda) cell with base's other
/// settings. A failing cell is recorded with ok = false and the sweep goes
/// on. Rows are sorted by (K, lambda).
std::vector<GridCell> grid_sweep(const ScreeningTrainSet& train,
                                 const EmbeddingMatrix& test_contexts,
                                 std::span<const std::size_t> k_list,
                                 std::span<const double> lambda_list, const TrainConfig& base);

using ConfigComments = std::vector<std::pair<std::string, std::string>>;

/// "# key=value" comment lines, then `K,lambda,accuracy,speedup,mean_subset,seed`.
void write_grid_csv(std::ostream& out, std::span<const GridCell> cells,
                    const ConfigComments& config);

/// Accuracy and speedup as two K x lambda pivot tables.
void print_grid_table(std::ostream& out, std::span<const GridCell> cells);

enum class SearcherKind : std::uint8_t { kExact, kScreened };

/// Per-query wall-clock latency. `warmup` untimed queries, then `iters`
/// timed passes over all contexts. Screened results are checked against
/// the exact winner whenever it lies in the subset (std::logic_error on a
/// mismatch). Throws InvalidArgument for iters == 0 or a missing model.
TimingStats bench_latency(SearcherKind kind, const ScreeningModel* model,
                          const EmbeddingMatrix& contexts, const EmbeddingMatrix& candidates,
                          std::size_t warmup, std::size_t iters);

}  // namespace mipscreen
