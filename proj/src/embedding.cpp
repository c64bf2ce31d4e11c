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

#include "mipscreen/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mipscreen/error.hpp"
#include "mipscreen/simd/kernels.hpp"

namespace mipscreen {

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim)
    : count_(count), dim_(dim), values_(count * dim, 0.0f) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> values)
    : count_(count), dim_(dim), values_(std::move(values)) {
  if (values_.size() != count * dim) {
    throw InvalidArgument("embedding matrix expects " + std::to_string(count * dim) +
                          " values, got " + std::to_string(values_.size()));
  }
}

EmbeddingMatrix EmbeddingMatrix::from_rows(
    std::initializer_list<std::initializer_list<float>> rows) {
  const std::size_t dim = rows.size() == 0 ? 0 : rows.begin()->size();
  std::vector<float> values;
  values.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) throw InvalidArgument("ragged rows in embedding matrix");
    values.insert(values.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(rows.size(), dim, std::move(values));
}

EmbeddingMatrix EmbeddingMatrix::gather(std::span<const std::size_t> rows) const {
  EmbeddingMatrix out(rows.size(), dim_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= count_) throw InvalidArgument("gather: row id out of range");
    std::copy_n(values_.data() + rows[i] * dim_, dim_, out.data() + i * dim_);
  }
  return out;
}

void EmbeddingMatrix::check_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument("non-finite value in row " + std::to_string(i / dim_));
    }
  }
}

double inner_product(VectorView u, VectorView v) {
  if (u.size() != v.size()) {
    throw InvalidArgument("inner_product: dimension mismatch (" + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()) + ")");
  }
  return simd::dot(u.data(), v.data(), u.size());
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double score_dual(VectorView context, VectorView response) {
  return sigmoid(inner_product(context, response));
}

double l2_norm(VectorView v) { return std::sqrt(inner_product(v, v)); }

Vector l2_normalize(VectorView v) {
  const double norm = l2_norm(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidArgument("l2_normalize: vector has zero norm");
  }
  Vector out(v.size());
  for (std::size_t d = 0; d < v.size(); ++d) {
    out[d] = static_cast<float>(static_cast<double>(v[d]) / norm);
  }
  return out;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace mipscreen
