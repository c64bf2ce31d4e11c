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

#include "mipscreen/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mipscreen/error.hpp"
#include "mipscreen/exact_search.hpp"

namespace mipscreen {

namespace {

void check_shapes(const ScreeningModel& model, const EmbeddingMatrix& contexts,
                  const EmbeddingMatrix* candidates) {
  model.validate();
  if (contexts.dim() != model.dim()) {
    throw InvalidArgument("contexts have dimension " + std::to_string(contexts.dim()) +
                          ", model expects " + std::to_string(model.dim()));
  }
  if (candidates != nullptr) {
    if (candidates->count() != model.num_candidates()) {
      throw InvalidArgument("model covers " + std::to_string(model.num_candidates()) +
                            " candidates but " + std::to_string(candidates->count()) +
                            " were supplied");
    }
    if (candidates->dim() != model.dim()) {
      throw InvalidArgument("candidates differ in dimension from the model");
    }
  }
}

bool contains(const ScreeningModel& model, std::size_t cluster, std::size_t candidate) {
  const BitSet& bits = model.subsets[cluster];
  return bits.none() || bits.test(candidate);
}

}  // namespace

double screening_accuracy(const ScreeningModel& model, const EmbeddingMatrix& contexts,
                          const EmbeddingMatrix& candidates, std::size_t threads) {
  check_shapes(model, contexts, &candidates);
  if (contexts.empty()) throw InvalidArgument("screening_accuracy: no contexts");
  const auto labels = build_labels(contexts, candidates, threads);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < contexts.count(); ++i) {
    if (contains(model, assign_cluster(contexts.row(i), model), labels[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(contexts.count());
}

double mean_subset_size(const ScreeningModel& model, const EmbeddingMatrix& contexts) {
  check_shapes(model, contexts, nullptr);
  if (contexts.empty()) throw InvalidArgument("mean_subset_size: no contexts");
  std::vector<std::size_t> sizes(model.num_clusters());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    sizes[k] = model.subsets[k].count();
    if (sizes[k] == 0) sizes[k] = model.num_candidates();
  }
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < contexts.count(); ++i) {
    total += sizes[assign_cluster(contexts.row(i), model)];
  }
  return static_cast<double>(total) / static_cast<double>(contexts.count());
}

double speedup_ratio(const ScreeningModel& model, const EmbeddingMatrix& contexts) {
  return static_cast<double>(model.num_candidates()) / mean_subset_size(model, contexts);
}

EvalReport evaluate_screening(const ScreeningModel& model, const EmbeddingMatrix& contexts,
                              const EmbeddingMatrix& candidates, std::size_t threads) {
  check_shapes(model, contexts, &candidates);
  if (contexts.empty()) throw InvalidArgument("evaluate_screening: no contexts");
  const std::size_t m = contexts.count();
  const std::size_t n = model.num_candidates();
  const auto labels = build_labels(contexts, candidates, threads);

  std::vector<std::uint8_t> contained(m), agreed(m), fallback(m);
  std::vector<std::uint64_t> sizes(m);
  parallel_for(m, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto c = contexts.row(i);
      const std::size_t k = assign_cluster(c, model);
      const std::size_t count = model.subsets[k].count();
      fallback[i] = count == 0;
      sizes[i] = count == 0 ? n : count;
      contained[i] = contains(model, k, labels[i]);
      agreed[i] = screened_search(c, model, candidates).index == labels[i];
    }
  });

  EvalReport report;
  report.num_contexts = m;
  report.num_candidates = n;
  std::size_t hits = 0, agree = 0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (contained[i] != agreed[i]) {
      throw std::logic_error("screened search disagrees with exact search on context " +
                             std::to_string(i) + " although the subset " +
                             (contained[i] ? "contains" : "excludes") + " the winner");
    }
    hits += contained[i];
    agree += agreed[i];
    report.fallback_count += fallback[i];
    total += sizes[i];
  }
  report.accuracy = static_cast<double>(hits) / static_cast<double>(m);
  report.top1_agreement = static_cast<double>(agree) / static_cast<double>(m);
  report.mean_subset_size = static_cast<double>(total) / static_cast<double>(m);
  report.speedup_ratio = static_cast<double>(n) / report.mean_subset_size;
  return report;
}

std::vector<GridCell> grid_sweep(const ScreeningTrainSet& train,
                                 const EmbeddingMatrix& test_contexts,
                                 std::span<const std::size_t> k_list,
                                 std::span<const double> lambda_list, const TrainConfig& base) {
  if (k_list.empty() || lambda_list.empty()) {
    throw InvalidArgument("grid_sweep: K and lambda lists must be non-empty");
  }
  const std::set<std::size_t> ks(k_list.begin(), k_list.end());
  const std::set<double> lambdas(lambda_list.begin(), lambda_list.end());
  std::vector<GridCell> cells;
  for (std::size_t k : ks) {
    for (double lambda : lambdas) {
      GridCell cell;
      cell.k = k;
      cell.lambda = lambda;
      cell.seed = base.sgd.seed;
      try {
        TrainConfig cfg = base;
        cfg.k = k;
        cfg.lambda = lambda;
        const TrainResult trained = train_screening(train, cfg);
        const EvalReport rep =
            evaluate_screening(trained.model, test_contexts, train.candidates, base.threads);
        cell.accuracy = rep.accuracy;
        cell.speedup = rep.speedup_ratio;
        cell.mean_subset = rep.mean_subset_size;
        cell.train_loss = trained.best_loss;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_grid_csv(std::ostream& out, std::span<const GridCell> cells,
                    const ConfigComments& config) {
  for (const auto& [key, value] : config) out << "# " << key << '=' << value << '\n';
  out << "K,lambda,accuracy,speedup,mean_subset,seed\n";
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  for (const auto& c : cells) {
    out << c.k << ',' << std::defaultfloat << std::setprecision(6) << c.lambda << ',';
    if (c.ok) {
      out << std::setprecision(10) << c.accuracy << ',' << c.speedup << ',' << c.mean_subset;
    } else {
      out << "NaN,NaN,NaN";
    }
    out << ',' << c.seed << '\n';
    if (!c.ok) out << "# failed K=" << c.k << " lambda=" << c.lambda << ": " << c.error << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

void print_grid_table(std::ostream& out, std::span<const GridCell> cells) {
  std::set<std::size_t> ks;
  std::set<double, std::greater<>> lambdas;  // largest lambda first
  std::map<std::pair<std::size_t, double>, const GridCell*> index;
  for (const auto& c : cells) {
    ks.insert(c.k);
    lambdas.insert(c.lambda);
    index[{c.k, c.lambda}] = &c;
  }
  const auto print = [&](const char* title, auto value) {
    out << title << '\n' << std::setw(6) << "K";
    for (double l : lambdas) {
      std::ostringstream h;
      h << std::setprecision(3) << l;
      out << std::setw(11) << h.str();
    }
    out << '\n';
    for (std::size_t k : ks) {
      out << std::setw(6) << k;
      for (double l : lambdas) {
        const auto it = index.find({k, l});
        if (it == index.end() || !it->second->ok) {
          out << std::setw(11) << "failed";
        } else {
          out << std::setw(11) << value(*it->second);
        }
      }
      out << '\n';
    }
  };
  const auto old_flags = out.flags();
  out << std::fixed;
  print("accuracy (%)", [](const GridCell& c) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << 100.0 * c.accuracy;
    return s.str();
  });
  out << '\n';
  print("speedup ratio", [](const GridCell& c) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << c.speedup;
    return s.str();
  });
  out.flags(old_flags);
}

TimingStats bench_latency(SearcherKind kind, const ScreeningModel* model,
                          const EmbeddingMatrix& contexts, const EmbeddingMatrix& candidates,
                          std::size_t warmup, std::size_t iters) {
  if (iters == 0) throw InvalidArgument("bench_latency: iters must be >= 1");
  if (contexts.empty()) throw InvalidArgument("bench_latency: no contexts");
  if (candidates.empty()) throw InvalidArgument("bench_latency: empty candidate set");
  if (contexts.dim() != candidates.dim()) {
    throw InvalidArgument("bench_latency: context/candidate dimension mismatch");
  }
  if (kind == SearcherKind::kScreened) {
    if (model == nullptr) throw InvalidArgument("bench_latency: screened search needs a model");
    check_shapes(*model, contexts, &candidates);
  }

  const auto labels = build_labels(contexts, candidates);
  const auto run = [&](std::size_t i) {
    const auto c = contexts.row(i);
    return kind == SearcherKind::kExact ? exact_argmax(c, candidates)
                                        : screened_search(c, *model, candidates);
  };

  const std::size_t m = contexts.count();
  volatile std::size_t sink = 0;
  for (std::size_t w = 0; w < warmup; ++w) sink = sink + run(w % m).index;

  std::vector<double> samples;
  samples.reserve(iters * m);
  for (std::size_t pass = 0; pass < iters; ++pass) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto start = std::chrono::steady_clock::now();
      const SearchResult r = run(i);
      const auto stop = std::chrono::steady_clock::now();
      samples.push_back(
          std::chrono::duration<double, std::nano>(stop - start).count());
      bool expect_exact = true;
      if (kind == SearcherKind::kScreened) {
        const BitSet& bits = model->subsets[assign_cluster(contexts.row(i), *model)];
        expect_exact = bits.none() || bits.test(labels[i]);
      }
      if (expect_exact && r.index != labels[i]) {
        throw std::logic_error("bench_latency: search result differs from exact winner on context " +
                               std::to_string(i));
      }
    }
  }

  TimingStats stats;
  stats.queries = samples.size();
  double sum = 0.0;
  for (double s : samples) sum += s;
  stats.mean_ns = sum / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  const auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size()))) ;
    return samples[std::min(samples.size() - 1, idx == 0 ? 0 : idx - 1)];
  };
  stats.p50_ns = quantile(0.50);
  stats.p99_ns = quantile(0.99);
  return stats;
}

}  // namespace mipscreen
