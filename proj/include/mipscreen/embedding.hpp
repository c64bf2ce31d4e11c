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

// Dense vector storage and the scalar scoring primitives shared by every
// other module. Vectors are stored as float and accumulated in double.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mipscreen {

using Vector = std::vector<float>;
using VectorView = std::span<const float>;

/// Row-major matrix of float vectors (contexts or response candidates).
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  /// Zero-filled count x dim matrix.
  EmbeddingMatrix(std::size_t count, std::size_t dim);
  /// Takes ownership of `values`, which must hold count * dim entries.
  EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> values);

  static EmbeddingMatrix from_rows(std::initializer_list<std::initializer_list<float>> rows);

  std::size_t count() const { return count_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return count_ == 0; }

  VectorView row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<float> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

  const float* data() const { return values_.data(); }
  float* data() { return values_.data(); }
  const std::vector<float>& values() const { return values_; }

  /// Copy of the listed rows, in the given order.
  EmbeddingMatrix gather(std::span<const std::size_t> rows) const;

  /// Throws InvalidArgument if any entry is NaN or infinite.
  void check_finite() const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

/// Row-major double matrix for intermediate quantities (soft assignments,
/// coefficients, gradients).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Sum of u[d] * v[d] accumulated in double (canonical kernel order).
/// Throws InvalidArgument on a length mismatch.
double inner_product(VectorView u, VectorView v);

/// Logistic function, evaluated without overflow for any finite x.
double sigmoid(double x);

/// sigmoid(inner_product(c, r)).
double score_dual(VectorView context, VectorView response);

double l2_norm(VectorView v);

/// v / |v|. Throws InvalidArgument for a zero (or non-finite norm) vector.
Vector l2_normalize(VectorView v);

/// Runs body(begin, end) over [0, n) split into at most `threads` contiguous
/// chunks. threads == 0 means hardware concurrency. Chunks never share
/// output slots, so results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body);

std::size_t resolve_threads(std::size_t requested);

}  // namespace mipscreen

#include <thread>

namespace mipscreen {

template <class Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2 * threads) {
    if (n > 0) body(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads - 1);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(std::size_t{0}, std::min(n, chunk));
}

}  // namespace mipscreen
