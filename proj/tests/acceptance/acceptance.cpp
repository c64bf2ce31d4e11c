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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mipscreen/distillation.hpp"
#include "mipscreen/error.hpp"
#include "mipscreen/eval.hpp"
#include "mipscreen/exact_search.hpp"
#include "mipscreen/formats.hpp"
#include "mipscreen/recall.hpp"
#include "mipscreen/screening_train.hpp"
#include "mipscreen/synthetic.hpp"
#include "../support.hpp"

using namespace mipscreen;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// --- 1: subset-step exactness ----------------------------------------------

Outcome subset_step_exactness() {
  std::size_t exact = 0, pairwise_ok = 0;
  const std::size_t instances = 100;
  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    CounterRng rng(derive_seed(1001, seed));
    const std::size_t k = 1 + rng.below(3);
    const std::size_t n = 1 + rng.below(12 / k);
    const std::size_t m = 2 + rng.below(10);
    const std::size_t d = 1 + rng.below(5);
    const double lambda = std::pow(10.0, -3.0 + 2.9 * rng.uniform());
    const auto ctx = testing::random_matrix(m, d, derive_seed(seed, 1), 1.5);
    const auto cen = testing::random_matrix(k, d, derive_seed(seed, 2));
    const auto labels = testing::random_labels(m, n, derive_seed(seed, 3));

    const Matrix mu = soft_assign_all(ctx, cen);
    const Matrix alpha = compute_alpha(mu, labels, n, lambda);
    const auto closed = update_subsets(alpha);
    const double best = testing::brute_force_min(
        k, n, [&](const std::vector<BitSet>& s) { return loss_from_alpha(alpha, s, m); });
    exact += loss_from_alpha(alpha, closed, m) == best;

    // Same question answered with the pairwise loss, free of the coefficient form.
    const double best_pairwise = testing::brute_force_min(k, n, [&](const std::vector<BitSet>& s) {
      return testing::ref_pair_loss_total(ctx, cen, s, labels, lambda);
    });
    const double closed_pairwise = testing::ref_pair_loss_total(ctx, cen, closed, labels, lambda);
    pairwise_ok += testing::rel_err(closed_pairwise, best_pairwise) <= 1e-12;
  }
  return {exact == instances && pairwise_ok == instances,
          format("%zu/%zu at the brute-force minimum (exact), %zu/%zu within 1e-12 on the "
                 "pairwise loss",
                 exact, instances, pairwise_ok, instances)};
}

// --- 2: loss identity --------------------------------------------------------

Outcome loss_identity() {
  double worst = 0.0;
  const std::size_t instances = 100;
  for (std::uint64_t seed = 0; seed < instances; ++seed) {
    CounterRng rng(derive_seed(2002, seed));
    const std::size_t m = 1 + rng.below(20), n = 1 + rng.below(20), k = 1 + rng.below(5);
    const std::size_t d = 1 + rng.below(8);
    ScreeningTrainSet data{testing::random_matrix(m, d, derive_seed(seed, 1)),
                           testing::random_matrix(n, d, derive_seed(seed, 2)),
                           testing::random_labels(m, n, derive_seed(seed, 3))};
    ScreeningModel model{testing::random_matrix(k, d, derive_seed(seed, 4)),
                         testing::random_subsets(k, n, derive_seed(seed, 5), rng.uniform()),
                         std::pow(10.0, -6.0 + 5.9 * rng.uniform())};
    const double literal = total_loss(model, data);
    const double coeff =
        loss_from_alpha(compute_alpha(soft_assign_all(data.contexts, model.centroids),
                                      data.labels, n, model.lambda),
                        model.subsets, m);
    worst = std::max(worst, testing::rel_err(literal, coeff));
  }
  return {worst <= 1e-9, format("max relative gap %.2e over %zu instances (tol 1e-9)", worst,
                                instances)};
}

// --- 3: monotone descent -----------------------------------------------------

Outcome monotone_descent() {
  auto syn = gen_synthetic({});
  const auto data = ScreeningTrainSet::from_embeddings(std::move(syn.train_contexts),
                                                       std::move(syn.candidates));
  std::size_t violations = 0, steps = 0;
  std::string trace;
  for (double lambda : {1e-6, 1e-3}) {
    TrainConfig cfg{.k = 10, .lambda = lambda, .alternations = 10};
    train_screening(data, cfg,
                    [&](std::size_t, const ScreeningModel& before, const ScreeningModel& after) {
                      const double lb = total_loss(before, data);
                      const double la = total_loss(after, data);
                      ++steps;
                      violations += la > lb;
                    });
  }
  return {violations == 0 && steps == 20,
          format("%zu violations over %zu subset steps (lambda 1e-6 and 1e-3, T=10, "
                 "recomputed with the pairwise loss)",
                 violations, steps)};
}

// --- 4: gradient correctness --------------------------------------------------

double centroid_loss(const Matrix& cen, const std::vector<BitSet>& s, double lambda,
                     const EmbeddingMatrix& ctx, const std::vector<std::uint32_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < ctx.count(); ++i) {
    std::vector<double> e(cen.rows());
    double z = 0.0;
    for (std::size_t k = 0; k < cen.rows(); ++k) {
      double dot = 0.0;
      for (std::size_t d = 0; d < cen.cols(); ++d) dot += cen(k, d) * ctx.row(i)[d];
      e[k] = std::exp(dot);
      z += e[k];
    }
    for (std::size_t j = 0; j < s.front().size(); ++j) {
      double p = 0.0;
      for (std::size_t k = 0; k < cen.rows(); ++k) p += s[k].test(j) ? e[k] / z : 0.0;
      total += labels[i] == j ? 1.0 - p : lambda * p;
    }
  }
  return total;
}

bool close(double analytic, double fd) {
  return std::abs(analytic - fd) <= 1e-4 * std::max({std::abs(analytic), std::abs(fd), 1e-6});
}

Outcome gradient_correctness() {
  std::size_t checked = 0, bad = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(derive_seed(4004, seed));
    const std::size_t k = 1 + rng.below(5), n = 2 + rng.below(6), d = 1 + rng.below(8);
    const std::size_t m = 3 + rng.below(10);
    const auto ctx = testing::random_matrix(m, d, derive_seed(seed, 1));
    const auto labels = testing::random_labels(m, n, derive_seed(seed, 2));
    const auto s = testing::random_subsets(k, n, derive_seed(seed, 3));
    Matrix cen = to_matrix(testing::random_matrix(k, d, derive_seed(seed, 4)));
    const double lambda = 0.1 * rng.uniform() + 1e-3;
    std::vector<std::size_t> batch(m);
    for (std::size_t i = 0; i < m; ++i) batch[i] = i;
    const Matrix g = centroid_gradient(cen, s, lambda, ctx, labels, batch);
    const double h = 1e-5;
    for (std::size_t i = 0; i < cen.values().size(); ++i) {
      const double keep = cen.values()[i];
      cen.values()[i] = keep + h;
      const double up = centroid_loss(cen, s, lambda, ctx, labels);
      cen.values()[i] = keep - h;
      const double down = centroid_loss(cen, s, lambda, ctx, labels);
      cen.values()[i] = keep;
      ++checked;
      bad += !close(g.values()[i], (up - down) / (2 * h));
    }
  }
  const std::size_t centroid_checked = checked;

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(derive_seed(4005, seed));
    const std::size_t f = 1 + rng.below(8), d = 1 + rng.below(8);
    std::vector<LabeledPair> pairs(12);
    std::vector<double> teacher(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      pairs[i].context.resize(f);
      pairs[i].response.resize(f);
      for (auto& x : pairs[i].context) x = static_cast<float>(rng.normal());
      for (auto& x : pairs[i].response) x = static_cast<float>(rng.normal());
      pairs[i].label = static_cast<std::uint8_t>(rng.below(2));
      teacher[i] = rng.uniform();
    }
    auto enc = DualEncoder::random(f, d, derive_seed(seed, 9), 0.5);
    const double beta = 2.0 * rng.uniform();
    std::vector<std::size_t> batch(pairs.size());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    const auto g = kd_gradient(enc, pairs, teacher, beta, batch);
    for (auto* map : {&enc.context_map, &enc.response_map}) {
      const auto& grad = map == &enc.context_map ? g.context_map : g.response_map;
      for (std::size_t p = 0; p < map->size(); ++p) {
        const float keep = (*map)[p];
        (*map)[p] = keep + 1e-4f;
        const double hp = static_cast<double>((*map)[p]) - keep;
        const double up = mean_kd_loss(enc, pairs, teacher, beta);
        (*map)[p] = keep - 1e-4f;
        const double hm = keep - static_cast<double>((*map)[p]);
        const double down = mean_kd_loss(enc, pairs, teacher, beta);
        (*map)[p] = keep;
        ++checked;
        bad += !close(grad[p], (up - down) / (hp + hm));
      }
    }
  }
  return {bad == 0, format("%zu/%zu entries off by more than 1e-4 relative (%zu centroid, %zu "
                           "encoder)",
                           bad, checked, centroid_checked, checked - centroid_checked)};
}

// --- 5: degenerate screening ---------------------------------------------------

Outcome degenerate_screening() {
  const SyntheticSpec specs[] = {
      {},
      {.m_train = 800, .m_test = 300, .n = 300, .d = 8, .topics = 10, .noise_sigma = 0.6, .seed = 5},
      {.m_train = 400, .m_test = 200, .n = 2000, .d = 32, .topics = 50, .noise_sigma = 0.2, .seed = 6},
      {.m_train = 2000, .m_test = 400, .n = 100, .d = 4, .topics = 3, .noise_sigma = 1.0, .seed = 7},
  };
  std::string detail;
  bool pass = true;
  for (const auto& spec : specs) {
    auto syn = gen_synthetic(spec);
    const auto data = ScreeningTrainSet::from_embeddings(syn.train_contexts, syn.candidates);
    const std::set<std::uint32_t> seen(data.labels.begin(), data.labels.end());
    const auto test_labels = build_labels(syn.test_contexts, syn.candidates);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < test_labels.size(); ++i) {
      if (seen.count(test_labels[i])) keep.push_back(i);
    }
    const auto test = syn.test_contexts.gather(keep);
    const auto model = train_screening(data, {.k = 1, .lambda = 1e-6, .alternations = 3}).model;
    const double acc = screening_accuracy(model, test, syn.candidates);
    pass = pass && acc == 1.0;
    detail += format("%s%.4f (%zu ctx)", detail.empty() ? "accuracy " : ", ", acc, keep.size());
  }
  return {pass, detail + " on 4 datasets"};
}

// --- 6: trade-off trend ----------------------------------------------------------

std::size_t inversions(const std::vector<double>& v, bool increasing) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < v.size(); ++i) n += increasing ? v[i] < v[i - 1] : v[i] > v[i - 1];
  return n;
}

Outcome tradeoff_trend() {
  auto syn = gen_synthetic({});
  const auto data = ScreeningTrainSet::from_embeddings(syn.train_contexts, syn.candidates);
  const std::size_t ks[] = {10};
  const double lambdas[] = {5e-7, 1e-6, 5e-6, 1e-5};
  const auto cells = grid_sweep(data, syn.test_contexts, ks, lambdas, TrainConfig{});
  std::vector<double> acc, speed;
  bool operating_point = false, all_ok = true;
  std::string row;
  for (const auto& c : cells) {
    all_ok = all_ok && c.ok;
    acc.push_back(c.accuracy);
    speed.push_back(c.speedup);
    operating_point = operating_point || (c.accuracy >= 0.90 && c.speedup >= 3.0);
    row += format(" %g:%.3f/%.2fx", c.lambda, c.accuracy, c.speedup);
  }
  const std::size_t inv = inversions(speed, true) + inversions(acc, false);
  return {all_ok && inv <= 1 && operating_point,
          format("%zu adjacent inversions, operating point %s; lambda:acc/speedup%s", inv,
                 operating_point ? "found" : "missing", row.c_str())};
}

// --- 7: screened-search soundness ---------------------------------------------------

Outcome screened_soundness() {
  auto syn = gen_synthetic({});
  const auto data = ScreeningTrainSet::from_embeddings(syn.train_contexts, syn.candidates);
  const auto& test = syn.test_contexts;
  bool pass = true;
  std::string detail;
  for (double lambda : {1e-6, 1e-2, 1e-1}) {
    const auto model = train_screening(data, {.k = 10, .lambda = lambda}).model;
    std::size_t contained = 0, agreed = 0, mismatched = 0;
    for (std::size_t i = 0; i < test.count(); ++i) {
      const std::size_t oracle = testing::ref_argmax(test.row(i), syn.candidates);
      const auto subset = predict_subset(test.row(i), model);
      const bool in = std::binary_search(subset.begin(), subset.end(), oracle);
      const bool hit = screened_search(test.row(i), model, syn.candidates).index == oracle;
      contained += in;
      agreed += hit;
      mismatched += in != hit;
    }
    const double acc = screening_accuracy(model, test, syn.candidates);
    const double agreement = double(agreed) / test.count();
    pass = pass && mismatched == 0 && std::abs(acc - agreement) <= 1.0 / test.count() &&
           contained == agreed;
    detail += format("%slambda %g: agreement %.3f vs accuracy %.3f", detail.empty() ? "" : "; ",
                     lambda, agreement, acc);
  }
  return {pass, detail};
}

// --- 8: distillation benefit ---------------------------------------------------------

struct DistillSetup {
  std::size_t features = 16;
  std::size_t train_dialogues = 1000;
  std::size_t test_dialogues = 500;
  double noise = 1.0;
  DistillConfig cfg{.learning_rate = 0.1, .epochs = 60, .batch_size = 32, .embedding_dim = 16};
};

Outcome distillation_benefit() {
  const DistillSetup setup;
  std::size_t gap_wins = 0, recall_wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PlantedTeacher teacher(setup.features, seed);
    const auto train = make_labeled_pairs(
        gen_dialogues(teacher, setup.train_dialogues, setup.noise, derive_seed(seed, 1)),
        derive_seed(seed, 2));
    const auto held = gen_dialogues(teacher, setup.test_dialogues, setup.noise, derive_seed(seed, 3));
    const auto held_pairs = make_labeled_pairs(held, derive_seed(seed, 4));
    std::vector<std::size_t> gt(setup.test_dialogues);
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = i;
    const auto instances = make_ranking_instances(gt, gt.size(), 10, derive_seed(seed, 5));

    double gap[2], recall[2];
    for (int b = 0; b < 2; ++b) {
      DistillConfig cfg = setup.cfg;
      cfg.beta = b;
      cfg.seed = seed;
      const auto enc = train_distilled(train, std::cref(teacher), cfg).encoder;
      double sq = 0.0;
      for (const auto& p : held_pairs) {
        const double diff = student_score(enc, p.context, p.response) - teacher(p.context, p.response);
        sq += diff * diff;
      }
      gap[b] = sq / held_pairs.size();
      const PairScorer scorer = [&](std::size_t i, std::size_t j) {
        return student_score(enc, held.contexts.row(i), held.responses.row(j));
      };
      recall[b] = recall_at_1(scorer, instances, gt.size(), gt.size());
    }
    gap_wins += gap[1] < gap[0];
    recall_wins += recall[1] >= recall[0];
    detail += format("%sseed %llu gap %.4f/%.4f R@1/10 %.3f/%.3f", detail.empty() ? "" : "; ",
                     static_cast<unsigned long long>(seed), gap[1], gap[0], recall[1], recall[0]);
  }
  return {gap_wins >= 4 && recall_wins >= 4,
          format("beta=1 lower gap in %zu/5, recall >= beta=0 in %zu/5 (", gap_wins, recall_wins) +
              detail + "; beta=1/beta=0)"};
}

// --- 9: oracle and harness sanity ----------------------------------------------------------

Outcome oracle_sanity() {
  std::size_t agree = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    CounterRng rng(derive_seed(9009, seed));
    const std::size_t n = 1 + rng.below(200), d = 1 + rng.below(40);
    const auto rows = testing::random_matrix(n, d, derive_seed(seed, 1));
    const auto q = testing::random_matrix(1, d, derive_seed(seed, 2));
    agree += exact_argmax(q.row(0), rows).index == testing::ref_argmax(q.row(0), rows);
  }
  const std::size_t count = 10000;
  std::vector<std::size_t> gt(count);
  for (std::size_t i = 0; i < count; ++i) gt[i] = i;
  const auto instances = make_ranking_instances(gt, count, 10, 99);
  const PairScorer random_scorer = [](std::size_t i, std::size_t j) {
    return static_cast<double>(mix64(derive_seed(i, j)) >> 11);
  };
  const double r = recall_at_1(random_scorer, instances, count, count);
  return {agree == 1000 && std::abs(r - 0.10) <= 0.02,
          format("exact_argmax agrees on %zu/1000; random scorer Recall@1/10 = %.4f (0.10 +- 0.02)",
                 agree, r)};
}

// --- 10: wall-clock speedup direction ------------------------------------------------------

Outcome wallclock_speedup() {
  auto syn = gen_synthetic({.m_train = 4000, .m_test = 300, .n = 100000, .d = 32, .topics = 100,
                            .noise_sigma = 0.3, .seed = 10});
  const auto data = ScreeningTrainSet::from_embeddings(syn.train_contexts, syn.candidates, 0);
  bool pass = true, any_applicable = false;
  std::string detail;
  for (double lambda : {1e-6, 1e-3}) {
    const auto model = train_screening(data, {.k = 20, .lambda = lambda, .alternations = 5}).model;
    const double ratio = speedup_ratio(model, syn.test_contexts);
    const auto exact = bench_latency(SearcherKind::kExact, nullptr, syn.test_contexts,
                                     syn.candidates, 20, 2);
    const auto screened = bench_latency(SearcherKind::kScreened, &model, syn.test_contexts,
                                        syn.candidates, 20, 2);
    const double wall = exact.mean_ns / screened.mean_ns;
    if (ratio >= 4.0) {
      any_applicable = true;
      pass = pass && wall >= 2.0;
    }
    detail += format("%slambda %g: ratio %.1f, exact %.0f us, screened %.1f us, wall %.1fx",
                     detail.empty() ? "" : "; ", lambda, ratio, exact.mean_ns / 1e3,
                     screened.mean_ns / 1e3, wall);
  }
  return {pass && any_applicable, detail};
}

// --- 11: persistence ---------------------------------------------------------------------------

bool mentions(const std::function<void()>& fn, std::initializer_list<const char*> parts) {
  try {
    fn();
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    return std::all_of(parts.begin(), parts.end(),
                       [&](const char* p) { return msg.find(p) != std::string::npos; });
  }
  return false;
}

Outcome persistence() {
  std::size_t round_trips = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CounterRng rng(derive_seed(1111, seed));
    const auto emb = testing::random_matrix(rng.below(50), 1 + rng.below(40), derive_seed(seed, 1));
    const auto emb_bytes = encode_embeddings(emb);
    const bool emb_ok = encode_embeddings(decode_embeddings(emb_bytes)) == emb_bytes;

    const std::size_t k = 1 + rng.below(8), n = 1 + rng.below(300);
    const ScreeningModel model{testing::random_matrix(k, 1 + rng.below(20), derive_seed(seed, 2)),
                               testing::random_subsets(k, n, derive_seed(seed, 3), rng.uniform()),
                               rng.uniform() * 0.5 + 1e-9};
    const auto model_bytes = encode_model(model);
    const auto model_back = decode_model(model_bytes);
    const bool model_ok = encode_model(model_back) == model_bytes && model_back == model;

    const auto enc = DualEncoder::random(1 + rng.below(20), 1 + rng.below(20), seed, 0.3);
    const auto enc_bytes = encode_encoder(enc);
    const bool enc_ok = encode_encoder(decode_encoder(enc_bytes)) == enc_bytes;
    round_trips += emb_ok && model_ok && enc_ok;
  }

  std::size_t diagnostics = 0, cases = 0;
  const auto check_corruptions = [&](Bytes bytes, auto decode) {
    const std::string expected = std::to_string(bytes.size());
    auto cut = bytes;
    cut.resize(bytes.size() - 2);
    const std::string found = std::to_string(cut.size());
    diagnostics += mentions([&] { decode(cut); }, {"expected", expected.c_str(), found.c_str()});
    auto magic = bytes;
    magic[1] ^= 0x20;
    diagnostics += mentions([&] { decode(magic); }, {"bad magic"});
    auto version = bytes;
    version[4] = 9;
    diagnostics += mentions([&] { decode(version); }, {"version 9"});
    cases += 3;
  };
  check_corruptions(encode_embeddings(testing::random_matrix(4, 3, 1)),
                    [](const Bytes& b) { decode_embeddings(b); });
  check_corruptions(encode_model({testing::random_matrix(2, 3, 2), testing::random_subsets(2, 9, 3), 0.1}),
                    [](const Bytes& b) { decode_model(b); });
  check_corruptions(encode_encoder(DualEncoder::random(3, 2, 4, 0.1)),
                    [](const Bytes& b) { decode_encoder(b); });
  return {round_trips == 100 && diagnostics == cases,
          format("%zu/100 payloads round-trip bitwise; %zu/%zu corruptions diagnosed", round_trips,
                 diagnostics, cases)};
}

struct Criterion {
  const char* name;
  double limit_s;
  Outcome (*run)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"subset-step exactness", 10, subset_step_exactness},
      {"loss identity", 5, loss_identity},
      {"monotone descent", 120, monotone_descent},
      {"gradient correctness", 30, gradient_correctness},
      {"degenerate screening", 30, degenerate_screening},
      {"trade-off trend", 300, tradeoff_trend},
      {"screened-search soundness", 60, screened_soundness},
      {"distillation benefit", 180, distillation_benefit},
      {"oracle and harness sanity", 30, oracle_sanity},
      {"wall-clock speedup direction", 300, wallclock_speedup},
      {"persistence", 10, persistence},
  };
  int failures = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_s;
    failures += !pass;
    std::printf("AC%02zu %s  %s: %s [%.2f s, limit %.0f s]\n", i + 1, pass ? "PASS" : "FAIL",
                c.name, o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
