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

#include "mipscreen/distillation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mipscreen/error.hpp"
#include "mipscreen/rng.hpp"

namespace mipscreen {

DualEncoder DualEncoder::random(std::size_t f, std::size_t d, std::uint64_t seed, double scale) {
  DualEncoder enc(f, d);
  CounterRng rng(derive_seed(seed, 0x44454e43));
  for (auto& w : enc.context_map) w = static_cast<float>(scale * rng.normal());
  for (auto& w : enc.response_map) w = static_cast<float>(scale * rng.normal());
  return enc;
}

void DualEncoder::validate() const {
  if (features == 0 || embedding == 0) throw InvalidArgument("encoder needs F, D >= 1");
  if (context_map.size() != features * embedding || response_map.size() != features * embedding) {
    throw InvalidArgument("encoder maps do not match F x D");
  }
  for (float v : context_map) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite context map entry");
  }
  for (float v : response_map) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite response map entry");
  }
}

void DistillConfig::validate() const {
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
  if (embedding_dim < 1) throw InvalidArgument("embedding dimension must be >= 1");
}

namespace {

// e = W^T x in double.
void encode_into(const std::vector<float>& map, std::size_t f_count, std::size_t d_count,
                 VectorView x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t f = 0; f < f_count; ++f) {
    const double xf = x[f];
    const float* w = map.data() + f * d_count;
    for (std::size_t d = 0; d < d_count; ++d) out[d] += xf * static_cast<double>(w[d]);
  }
}

double student_logit(const DualEncoder& enc, VectorView x, VectorView y, std::span<double> ec,
                     std::span<double> er) {
  encode_into(enc.context_map, enc.features, enc.embedding, x, ec);
  encode_into(enc.response_map, enc.features, enc.embedding, y, er);
  double u = 0.0;
  for (std::size_t d = 0; d < enc.embedding; ++d) u += ec[d] * er[d];
  return u;
}

void check_pairs(const DualEncoder& enc, std::span<const LabeledPair> pairs,
                 std::span<const double> teacher_scores) {
  if (teacher_scores.size() != pairs.size()) {
    throw InvalidArgument("need one teacher score per pair");
  }
  for (const auto& p : pairs) {
    if (p.context.size() != enc.features || p.response.size() != enc.features) {
      throw InvalidArgument("pair features do not match encoder F=" +
                            std::to_string(enc.features));
    }
  }
}

}  // namespace

Vector encode(const DualEncoder& encoder, VectorView features, Side side) {
  if (features.size() != encoder.features) {
    throw InvalidArgument("encode: expected " + std::to_string(encoder.features) +
                          " features, got " + std::to_string(features.size()));
  }
  std::vector<double> acc(encoder.embedding);
  encode_into(encoder.map(side), encoder.features, encoder.embedding, features, acc);
  return Vector(acc.begin(), acc.end());
}

EmbeddingMatrix encode_all(const DualEncoder& encoder, const EmbeddingMatrix& features,
                           Side side) {
  if (features.dim() != encoder.features) {
    throw InvalidArgument("encode_all: feature dimension mismatch");
  }
  EmbeddingMatrix out(features.count(), encoder.embedding);
  std::vector<double> acc(encoder.embedding);
  for (std::size_t i = 0; i < features.count(); ++i) {
    encode_into(encoder.map(side), encoder.features, encoder.embedding, features.row(i), acc);
    std::copy(acc.begin(), acc.end(), out.row(i).begin());
  }
  return out;
}

double bce(double score, bool label) {
  const double s = std::clamp(score, kScoreClamp, 1.0 - kScoreClamp);
  return label ? -std::log(s) : -std::log1p(-s);
}

double kd_loss(double score_dual, double score_teacher, bool label, double beta) {
  const double gap = score_dual - score_teacher;
  return beta * gap * gap + bce(score_dual, label);
}

double student_score(const DualEncoder& encoder, VectorView context, VectorView response) {
  if (context.size() != encoder.features || response.size() != encoder.features) {
    throw InvalidArgument("student_score: feature dimension mismatch");
  }
  std::vector<double> ec(encoder.embedding), er(encoder.embedding);
  return sigmoid(student_logit(encoder, context, response, ec, er));
}

double mean_kd_loss(const DualEncoder& encoder, std::span<const LabeledPair> pairs,
                    std::span<const double> teacher_scores, double beta,
                    std::span<const std::size_t> batch) {
  check_pairs(encoder, pairs, teacher_scores);
  std::vector<double> ec(encoder.embedding), er(encoder.embedding);
  double total = 0.0;
  std::size_t n = 0;
  auto add = [&](std::size_t i) {
    const auto& p = pairs[i];
    const double s = sigmoid(student_logit(encoder, p.context, p.response, ec, er));
    total += kd_loss(s, teacher_scores[i], p.label != 0, beta);
    ++n;
  };
  if (batch.empty()) {
    for (std::size_t i = 0; i < pairs.size(); ++i) add(i);
  } else {
    for (std::size_t i : batch) {
      if (i >= pairs.size()) throw InvalidArgument("mean_kd_loss: batch id out of range");
      add(i);
    }
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

EncoderGradient kd_gradient(const DualEncoder& encoder, std::span<const LabeledPair> pairs,
                            std::span<const double> teacher_scores, double beta,
                            std::span<const std::size_t> batch) {
  check_pairs(encoder, pairs, teacher_scores);
  if (batch.empty()) throw InvalidArgument("kd_gradient: empty batch");
  const std::size_t f_count = encoder.features;
  const std::size_t d_count = encoder.embedding;
  EncoderGradient grad{std::vector<double>(f_count * d_count, 0.0),
                       std::vector<double>(f_count * d_count, 0.0)};
  std::vector<double> ec(d_count), er(d_count);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    if (i >= pairs.size()) throw InvalidArgument("kd_gradient: batch id out of range");
    const auto& p = pairs[i];
    const double s = sigmoid(student_logit(encoder, p.context, p.response, ec, er));
    // dL/du for L = beta (s - t)^2 + BCE(s, y), s = sigmoid(u).
    const double dl_du =
        (2.0 * beta * (s - teacher_scores[i]) * s * (1.0 - s) + (s - (p.label ? 1.0 : 0.0))) *
        inv;
    for (std::size_t f = 0; f < f_count; ++f) {
      const double xc = dl_du * p.context[f];
      const double xr = dl_du * p.response[f];
      double* gc = grad.context_map.data() + f * d_count;
      double* gr = grad.response_map.data() + f * d_count;
      for (std::size_t d = 0; d < d_count; ++d) {
        gc[d] += xc * er[d];
        gr[d] += xr * ec[d];
      }
    }
  }
  return grad;
}

DistillResult train_distilled(std::span<const LabeledPair> pairs, const TeacherOracle& teacher,
                              const DistillConfig& cfg) {
  cfg.validate();
  if (pairs.empty()) throw InvalidArgument("train_distilled: empty dataset");
  const bool has_pos = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.label != 0; });
  const bool has_neg = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.label == 0; });
  if (!has_pos || !has_neg) {
    throw InvalidArgument("train_distilled: need at least one positive and one negative pair");
  }
  const std::size_t f_count = pairs.front().context.size();

  std::vector<double> teacher_scores(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    teacher_scores[i] = teacher(pairs[i].context, pairs[i].response);
  }

  DistillResult result;
  result.encoder = DualEncoder::random(f_count, cfg.embedding_dim, cfg.seed, cfg.init_scale);
  CounterRng rng(derive_seed(cfg.seed, 0x5347440a));
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Parameters are updated in double and rounded to float once per step.
  std::vector<double> wc(result.encoder.context_map.begin(), result.encoder.context_map.end());
  std::vector<double> wr(result.encoder.response_map.begin(), result.encoder.response_map.end());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const auto grad = kd_gradient(result.encoder, pairs, teacher_scores, cfg.beta,
                                    std::span<const std::size_t>(order.data() + start, end - start));
      for (std::size_t i = 0; i < wc.size(); ++i) {
        wc[i] -= cfg.learning_rate * grad.context_map[i];
        wr[i] -= cfg.learning_rate * grad.response_map[i];
        result.encoder.context_map[i] = static_cast<float>(wc[i]);
        result.encoder.response_map[i] = static_cast<float>(wr[i]);
      }
    }
    result.loss_trajectory.push_back(
        mean_kd_loss(result.encoder, pairs, teacher_scores, cfg.beta));
  }
  return result;
}

// --- planted world ----------------------------------------------------------

namespace {
constexpr std::size_t kTanhUnits = 8;
}

PlantedTeacher::PlantedTeacher(std::size_t features, std::uint64_t seed)
    : features_(features),
      rotation_(features * features),
      tanh_in_(kTanhUnits * 2 * features),
      tanh_out_(kTanhUnits),
      match_scale_(2.0 / static_cast<double>(features)),
      bias_(-1.0) {
  if (features == 0) throw InvalidArgument("planted teacher needs F >= 1");
  CounterRng rng(derive_seed(seed, 0x54454143));
  // Random rotation by Gram-Schmidt on a Gaussian matrix.
  for (auto& v : rotation_) v = rng.normal();
  for (std::size_t r = 0; r < features; ++r) {
    double* row = rotation_.data() + r * features;
    for (std::size_t q = 0; q < r; ++q) {
      const double* prev = rotation_.data() + q * features;
      double proj = 0.0;
      for (std::size_t c = 0; c < features; ++c) proj += row[c] * prev[c];
      for (std::size_t c = 0; c < features; ++c) row[c] -= proj * prev[c];
    }
    double norm = 0.0;
    for (std::size_t c = 0; c < features; ++c) norm += row[c] * row[c];
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < features; ++c) row[c] /= norm;
  }
  const double in_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(features));
  for (auto& v : tanh_in_) v = in_scale * rng.normal();
  for (auto& v : tanh_out_) v = 0.5 * rng.normal();
}

Vector PlantedTeacher::relate(VectorView context) const {
  if (context.size() != features_) throw InvalidArgument("planted teacher: wrong F");
  Vector out(features_);
  for (std::size_t r = 0; r < features_; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < features_; ++c) acc += rotation_[r * features_ + c] * context[c];
    out[r] = static_cast<float>(acc);
  }
  return out;
}

double PlantedTeacher::operator()(VectorView context, VectorView response) const {
  if (context.size() != features_ || response.size() != features_) {
    throw InvalidArgument("planted teacher: wrong F");
  }
  double logit = bias_;
  // Square units: ((Ax)_r + y_r)^2 / 4 - ((Ax)_r - y_r)^2 / 4 = (Ax)_r * y_r.
  for (std::size_t r = 0; r < features_; ++r) {
    double ax = 0.0;
    for (std::size_t c = 0; c < features_; ++c) ax += rotation_[r * features_ + c] * context[c];
    const double plus = ax + response[r];
    const double minus = ax - response[r];
    logit += match_scale_ * 0.25 * (plus * plus - minus * minus);
  }
  for (std::size_t h = 0; h < kTanhUnits; ++h) {
    const double* w = tanh_in_.data() + h * 2 * features_;
    double pre = 0.0;
    for (std::size_t c = 0; c < features_; ++c) pre += w[c] * context[c];
    for (std::size_t c = 0; c < features_; ++c) pre += w[features_ + c] * response[c];
    logit += tanh_out_[h] * std::tanh(pre);
  }
  return sigmoid(logit);
}

DialogueSet gen_dialogues(const PlantedTeacher& teacher, std::size_t count, double noise,
                          std::uint64_t seed) {
  const std::size_t f = teacher.features();
  DialogueSet out{EmbeddingMatrix(count, f), EmbeddingMatrix(count, f)};
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(derive_seed(seed, 0x444c4700 + i));
    auto x = out.contexts.row(i);
    for (auto& v : x) v = static_cast<float>(rng.normal());
    const Vector related = teacher.relate(x);
    auto y = out.responses.row(i);
    for (std::size_t c = 0; c < f; ++c) {
      y[c] = static_cast<float>(related[c] + noise * rng.normal());
    }
  }
  return out;
}

std::vector<LabeledPair> make_labeled_pairs(const DialogueSet& dialogues, std::uint64_t seed) {
  const std::size_t n = dialogues.contexts.count();
  if (n < 2) throw InvalidArgument("make_labeled_pairs: need at least two dialogues");
  auto as_vec = [](VectorView v) { return Vector(v.begin(), v.end()); };
  std::vector<LabeledPair> pairs;
  pairs.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    pairs.push_back({as_vec(dialogues.contexts.row(i)), as_vec(dialogues.responses.row(i)), 1});
  }
  CounterRng rng(derive_seed(seed, 0x4e454700));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t other = static_cast<std::size_t>(rng.below(n - 1));
    if (other >= i) ++other;
    pairs.push_back({as_vec(dialogues.contexts.row(i)), as_vec(dialogues.responses.row(other)), 0});
  }
  return pairs;
}

}  // namespace mipscreen
