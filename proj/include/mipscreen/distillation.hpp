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

// Dual-encoder training with knowledge distillation. Two linear maps stand
// in for the context and response encoders; the student score is
// sigmoid(<W_ctx^T x, W_resp^T y>) and is trained on
//   beta * (score_dual - score_teacher)^2 + BCE(score_dual, label).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mipscreen/embedding.hpp"

namespace mipscreen {

enum class Side : std::uint8_t { kContext, kResponse };

/// Linear context/response encoders. Maps are F x D, row-major; the
/// embedding of features x is e[d] = sum_f x[f] * W[f][d].
struct DualEncoder {
  std::size_t features = 0;   // F
  std::size_t embedding = 0;  // D
  std::vector<float> context_map;
  std::vector<float> response_map;

  DualEncoder() = default;
  DualEncoder(std::size_t f, std::size_t d)
      : features(f), embedding(d), context_map(f * d, 0.0f), response_map(f * d, 0.0f) {}

  /// Small seeded Gaussian initialisation (std = scale).
  static DualEncoder random(std::size_t f, std::size_t d, std::uint64_t seed, double scale);

  const std::vector<float>& map(Side side) const {
    return side == Side::kContext ? context_map : response_map;
  }

  void validate() const;

  friend bool operator==(const DualEncoder&, const DualEncoder&) = default;
};

Vector encode(const DualEncoder& encoder, VectorView features, Side side);

/// Encodes every row of a feature matrix.
EmbeddingMatrix encode_all(const DualEncoder& encoder, const EmbeddingMatrix& features,
                           Side side);

/// Opaque (context features, response features) -> score in (0, 1).
using TeacherOracle = std::function<double(VectorView context, VectorView response)>;

struct LabeledPair {
  Vector context;
  Vector response;
  std::uint8_t label = 0;
};

struct DistillConfig {
  double beta = 1.0;
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  std::size_t embedding_dim = 8;
  double init_scale = 0.1;

  void validate() const;
};

inline constexpr double kScoreClamp = 1e-12;

/// Binary cross entropy with the score clamped to [1e-12, 1 - 1e-12].
double bce(double score, bool label);

double kd_loss(double score_dual, double score_teacher, bool label, double beta);

/// Student score of a pair.
double student_score(const DualEncoder& encoder, VectorView context, VectorView response);

/// Mean kd_loss over the listed pairs (all pairs when `batch` is empty).
double mean_kd_loss(const DualEncoder& encoder, std::span<const LabeledPair> pairs,
                    std::span<const double> teacher_scores, double beta,
                    std::span<const std::size_t> batch = {});

struct EncoderGradient {
  std::vector<double> context_map;
  std::vector<double> response_map;
};

/// Analytic gradient of mean_kd_loss over `batch` with respect to both maps.
/// Uses d(bce)/du = s - label, which is exact away from the clamp.
EncoderGradient kd_gradient(const DualEncoder& encoder, std::span<const LabeledPair> pairs,
                            std::span<const double> teacher_scores, double beta,
                            std::span<const std::size_t> batch);

struct DistillResult {
  DualEncoder encoder;
  std::vector<double> loss_trajectory;  // mean training kd_loss after each epoch
};

/// Mini-batch SGD on mean kd_loss. Teacher scores are computed once per pair.
/// Needs at least one positive and one negative pair.
DistillResult train_distilled(std::span<const LabeledPair> pairs, const TeacherOracle& teacher,
                              const DistillConfig& cfg);

// --- planted desk-scale world ---------------------------------------------

/// Fixed random teacher: a two-layer network on the concatenated features.
/// Hidden layer: square units on (A x + y) and (A x - y), which together
/// give the bilinear match x^T A^T y, plus a small tanh block; output
/// squashed with a sigmoid. A is a random rotation.
class PlantedTeacher {
 public:
  PlantedTeacher(std::size_t features, std::uint64_t seed);

  double operator()(VectorView context, VectorView response) const;

  std::size_t features() const { return features_; }
  /// The planted relation used to generate true responses: y = A x + noise.
  Vector relate(VectorView context) const;

 private:
  std::size_t features_;
  std::vector<double> rotation_;     // F x F
  std::vector<double> tanh_in_;      // H x 2F
  std::vector<double> tanh_out_;     // H
  double match_scale_;
  double bias_;
};

/// Context/response feature pairs drawn from the planted relation.
struct DialogueSet {
  EmbeddingMatrix contexts;   // count x F
  EmbeddingMatrix responses;  // count x F, row i is the true response of context i
};

DialogueSet gen_dialogues(const PlantedTeacher& teacher, std::size_t count, double noise,
                          std::uint64_t seed);

/// One positive per dialogue plus one negative that swaps in a random other
/// response (1:1), positives first.
std::vector<LabeledPair> make_labeled_pairs(const DialogueSet& dialogues, std::uint64_t seed);

}  // namespace mipscreen
