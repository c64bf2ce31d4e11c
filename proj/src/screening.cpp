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

#include "mipscreen/screening.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mipscreen/error.hpp"
#include "mipscreen/simd/kernels.hpp"

namespace mipscreen {

void ScreeningModel::validate() const {
  if (centroids.count() < 1) throw InvalidArgument("screening model needs K >= 1");
  if (subsets.size() != centroids.count()) {
    throw InvalidArgument("screening model has " + std::to_string(centroids.count()) +
                          " centroids but " + std::to_string(subsets.size()) + " subsets");
  }
  const std::size_t n = subsets.front().size();
  if (n < 1) throw InvalidArgument("screening model needs N >= 1");
  for (const auto& s : subsets) {
    if (s.size() != n) throw InvalidArgument("screening subsets differ in length");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw InvalidArgument("screening lambda must lie in (0, 1)");
  }
  centroids.check_finite();
}

ScreeningTrainSet ScreeningTrainSet::from_embeddings(EmbeddingMatrix contexts,
                                                     EmbeddingMatrix candidates,
                                                     std::size_t threads) {
  ScreeningTrainSet out;
  out.labels = build_labels(contexts, candidates, threads);
  out.contexts = std::move(contexts);
  out.candidates = std::move(candidates);
  return out;
}

void ScreeningTrainSet::validate() const {
  if (contexts.empty()) throw InvalidArgument("training set has no contexts");
  if (candidates.empty()) throw InvalidArgument("training set has no candidates");
  if (contexts.dim() != candidates.dim()) {
    throw InvalidArgument("training contexts and candidates differ in dimension");
  }
  if (labels.size() != contexts.count()) {
    throw InvalidArgument("training set has " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(contexts.count()) + " contexts");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= candidates.count()) {
      throw InvalidArgument("label of context " + std::to_string(i) + " is out of range");
    }
  }
}

namespace {

void softmax_inplace(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

void check_model_against(const ScreeningModel& model, const ScreeningTrainSet& data) {
  model.validate();
  data.validate();
  if (model.num_candidates() != data.num_candidates()) {
    throw InvalidArgument("model covers " + std::to_string(model.num_candidates()) +
                          " candidates, training set has " +
                          std::to_string(data.num_candidates()));
  }
  if (model.dim() != data.contexts.dim()) {
    throw InvalidArgument("model and training contexts differ in dimension");
  }
}

}  // namespace

std::vector<double> soft_assign(VectorView context, const EmbeddingMatrix& centroids) {
  if (centroids.empty()) throw InvalidArgument("soft_assign: no centroids");
  if (context.size() != centroids.dim()) throw InvalidArgument("soft_assign: dimension mismatch");
  std::vector<double> mu(centroids.count());
  simd::kernels().dot_rows(context.data(), centroids.data(), centroids.count(), centroids.dim(),
                           mu.data());
  softmax_inplace(mu);
  return mu;
}

Matrix soft_assign_all(const EmbeddingMatrix& contexts, const EmbeddingMatrix& centroids,
                       std::size_t threads) {
  if (centroids.empty()) throw InvalidArgument("soft_assign: no centroids");
  if (contexts.dim() != centroids.dim()) throw InvalidArgument("soft_assign: dimension mismatch");
  Matrix mu(contexts.count(), centroids.count());
  const auto& kern = simd::kernels();
  parallel_for(contexts.count(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = mu.row(i);
      kern.dot_rows(contexts.row(i).data(), centroids.data(), centroids.count(),
                    centroids.dim(), row.data());
      softmax_inplace(row);
    }
  });
  return mu;
}

double retrieve_prob(std::span<const double> mu, std::span<const BitSet> subsets,
                     std::size_t candidate) {
  if (mu.size() != subsets.size()) {
    throw InvalidArgument("retrieve_prob: mu has " + std::to_string(mu.size()) +
                          " entries for " + std::to_string(subsets.size()) + " subsets");
  }
  double p = 0.0;
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    if (candidate >= subsets[k].size()) {
      throw InvalidArgument("retrieve_prob: candidate " + std::to_string(candidate) +
                            " out of range");
    }
    if (subsets[k].test(candidate)) p += mu[k];
  }
  return p;
}

double pair_loss(double p, bool is_label, double lambda) {
  return is_label ? 1.0 - p : lambda * p;
}

double total_loss(const ScreeningModel& model, const ScreeningTrainSet& data) {
  check_model_against(model, data);
  const std::size_t n = data.num_candidates();
  const Matrix mu = soft_assign_all(data.contexts, model.centroids);
  std::vector<double> p(n);
  double total = 0.0;
  for (std::size_t i = 0; i < data.num_contexts(); ++i) {
    std::fill(p.begin(), p.end(), 0.0);
    for (std::size_t k = 0; k < model.num_clusters(); ++k) {
      const double w = mu(i, k);
      model.subsets[k].for_each_set([&](std::size_t j) { p[j] += w; });
    }
    for (std::size_t j = 0; j < n; ++j) {
      total += pair_loss(p[j], j == data.labels[i], model.lambda);
    }
  }
  return total;
}

Matrix compute_alpha(const Matrix& mu, std::span<const std::uint32_t> labels,
                     std::size_t num_candidates, double lambda) {
  if (mu.rows() != labels.size()) {
    throw InvalidArgument("compute_alpha: " + std::to_string(mu.rows()) + " mu rows for " +
                          std::to_string(labels.size()) + " labels");
  }
  const std::size_t k_count = mu.cols();
  std::vector<double> cluster_mass(k_count, 0.0);
  Matrix label_mass(k_count, num_candidates, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_candidates) throw InvalidArgument("compute_alpha: label out of range");
    for (std::size_t k = 0; k < k_count; ++k) {
      cluster_mass[k] += mu(i, k);
      label_mass(k, labels[i]) += mu(i, k);
    }
  }
  Matrix alpha(k_count, num_candidates);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double base = lambda * cluster_mass[k];
    for (std::size_t j = 0; j < num_candidates; ++j) {
      alpha(k, j) = base - (lambda + 1.0) * label_mass(k, j);
    }
  }
  return alpha;
}

double loss_from_alpha(const Matrix& alpha, std::span<const BitSet> subsets,
                       std::size_t num_contexts) {
  if (alpha.rows() != subsets.size()) throw InvalidArgument("loss_from_alpha: shape mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    if (subsets[k].size() != alpha.cols()) {
      throw InvalidArgument("loss_from_alpha: shape mismatch");
    }
    subsets[k].for_each_set([&](std::size_t j) { total += alpha(k, j); });
  }
  return total + static_cast<double>(num_contexts);
}

std::vector<BitSet> update_subsets(const Matrix& alpha) {
  std::vector<BitSet> subsets;
  subsets.reserve(alpha.rows());
  for (std::size_t k = 0; k < alpha.rows(); ++k) {
    BitSet s(alpha.cols());
    for (std::size_t j = 0; j < alpha.cols(); ++j) {
      if (alpha(k, j) <= 0.0) s.set(j);
    }
    subsets.push_back(std::move(s));
  }
  return subsets;
}

Matrix centroid_gradient(const Matrix& centroids, std::span<const BitSet> subsets,
                         double lambda, const EmbeddingMatrix& contexts,
                         std::span<const std::uint32_t> labels,
                         std::span<const std::size_t> batch) {
  const std::size_t k_count = centroids.rows();
  const std::size_t dim = centroids.cols();
  if (subsets.size() != k_count) throw InvalidArgument("centroid_gradient: shape mismatch");
  if (contexts.dim() != dim) throw InvalidArgument("centroid_gradient: dimension mismatch");
  if (labels.size() != contexts.count()) {
    throw InvalidArgument("centroid_gradient: label count mismatch");
  }
  if (batch.empty()) throw InvalidArgument("centroid_gradient: empty batch");

  // Per context the loss collapses to 1 + sum_k mu_k * g_k with
  // g_k = lambda * |s_k| - (1 + lambda) * s_k[label].
  std::vector<double> subset_size(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    subset_size[k] = static_cast<double>(subsets[k].count());
  }

  Matrix grad(k_count, dim, 0.0);
  std::vector<double> mu(k_count);
  std::vector<double> g(k_count);
  for (std::size_t i : batch) {
    if (i >= contexts.count()) throw InvalidArgument("centroid_gradient: batch id out of range");
    const auto c = contexts.row(i);
    for (std::size_t k = 0; k < k_count; ++k) {
      double z = 0.0;
      for (std::size_t d = 0; d < dim; ++d) z += static_cast<double>(c[d]) * centroids(k, d);
      mu[k] = z;
      const bool hit = subsets[k].test(labels[i]);
      g[k] = lambda * subset_size[k] - (hit ? 1.0 + lambda : 0.0);
    }
    softmax_inplace(mu);
    double mean_g = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) mean_g += mu[k] * g[k];
    for (std::size_t k = 0; k < k_count; ++k) {
      const double coef = mu[k] * (g[k] - mean_g);
      if (coef == 0.0) continue;
      auto row = grad.row(k);
      for (std::size_t d = 0; d < dim; ++d) row[d] += coef * static_cast<double>(c[d]);
    }
  }
  return grad;
}

Matrix centroid_gradient(const ScreeningModel& model, const ScreeningTrainSet& data,
                         std::span<const std::size_t> batch) {
  check_model_against(model, data);
  return centroid_gradient(to_matrix(model.centroids), model.subsets, model.lambda,
                           data.contexts, data.labels, batch);
}

Matrix to_matrix(const EmbeddingMatrix& m) {
  Matrix out(m.count(), m.dim());
  std::copy(m.values().begin(), m.values().end(), out.values().begin());
  return out;
}

std::size_t assign_cluster(VectorView context, const ScreeningModel& model) {
  if (context.size() != model.dim()) {
    throw InvalidArgument("query has dimension " + std::to_string(context.size()) +
                          ", model expects " + std::to_string(model.dim()));
  }
  return simd::kernels()
      .argmax_rows(context.data(), model.centroids.data(), model.num_clusters(), model.dim())
      .index;
}

std::size_t predicted_size(VectorView context, const ScreeningModel& model) {
  const std::size_t n = model.subsets[assign_cluster(context, model)].count();
  return n == 0 ? model.num_candidates() : n;
}

std::vector<std::size_t> predict_subset(VectorView context, const ScreeningModel& model) {
  const BitSet& bits = model.subsets[assign_cluster(context, model)];
  std::vector<std::size_t> out;
  if (bits.none()) {
    out.resize(model.num_candidates());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = j;
    return out;
  }
  out.reserve(bits.count());
  bits.for_each_set([&](std::size_t j) { out.push_back(j); });
  return out;
}

SearchResult screened_search(VectorView context, const ScreeningModel& model,
                             const EmbeddingMatrix& candidates) {
  if (candidates.empty()) throw InvalidArgument("screened_search: empty candidate set");
  if (model.num_candidates() != candidates.count()) {
    throw InvalidArgument("model covers " + std::to_string(model.num_candidates()) +
                          " candidates but " + std::to_string(candidates.count()) +
                          " were supplied");
  }
  if (candidates.dim() != context.size()) {
    throw InvalidArgument("screened_search: dimension mismatch");
  }
  const BitSet& bits = model.subsets[assign_cluster(context, model)];
  if (bits.none()) return exact_argmax(context, candidates);
  const auto best = simd::kernels().argmax_masked(context.data(), candidates.data(),
                                                  candidates.count(), candidates.dim(),
                                                  bits.words());
  return {best.index, best.score};
}

}  // namespace mipscreen
