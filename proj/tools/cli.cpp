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

#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "mipscreen/distillation.hpp"
#include "mipscreen/error.hpp"
#include "mipscreen/eval.hpp"
#include "mipscreen/exact_search.hpp"
#include "mipscreen/formats.hpp"
#include "mipscreen/recall.hpp"
#include "mipscreen/screening_train.hpp"
#include "mipscreen/simd/kernels.hpp"
#include "mipscreen/synthetic.hpp"

namespace mipscreen::cli {

namespace fs = std::filesystem;

namespace {

// Data/validation failure that should exit with code 2.
struct DataError : Error {
  using Error::Error;
};

std::string fmt(double v, int precision = 10) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

EmbeddingMatrix load_matrix(const std::string& path, const char* flag) {
  try {
    return read_embeddings(path);
  } catch (const Error& e) {
    throw DataError(std::string(flag) + ": " + e.what());
  }
}

ScreeningModel load_model(const std::string& path) {
  try {
    return read_model(path);
  } catch (const Error& e) {
    throw DataError(std::string("--model: ") + e.what());
  }
}

void require_same_dim(const EmbeddingMatrix& a, const char* flag_a, const EmbeddingMatrix& b,
                      const char* flag_b) {
  if (a.dim() != b.dim()) {
    throw DataError(std::string(flag_a) + " has dimension " + std::to_string(a.dim()) + " but " +
                    flag_b + " has " + std::to_string(b.dim()));
  }
}

void require_model_fits(const ScreeningModel& model, const EmbeddingMatrix& candidates) {
  if (model.num_candidates() != candidates.count()) {
    throw DataError("--model covers N=" + std::to_string(model.num_candidates()) +
                    " candidates but --candidates has " + std::to_string(candidates.count()));
  }
  if (model.dim() != candidates.dim()) {
    throw DataError("--model has dimension " + std::to_string(model.dim()) +
                    " but --candidates has " + std::to_string(candidates.dim()));
  }
}

std::ofstream open_report(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("--report: cannot open '" + path + "' for writing");
  return out;
}

void write_comments(std::ostream& out, const ConfigComments& config) {
  for (const auto& [k, v] : config) out << "# " << k << '=' << v << '\n';
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt(xs[i], 6);
  return s;
}

// ---------------------------------------------------------------------------

struct GenOptions {
  SyntheticSpec spec;
  std::string out_dir = ".";
};

void run_gen(const GenOptions& o, std::ostream& out) {
  const SyntheticData data = gen_synthetic(o.spec);
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw DataError("--out-dir: cannot create '" + o.out_dir + "': " + ec.message());
  const fs::path dir(o.out_dir);
  write_embeddings(data.train_contexts, dir / "train_contexts.emb");
  write_embeddings(data.test_contexts, dir / "test_contexts.emb");
  write_embeddings(data.candidates, dir / "candidates.emb");
  out << "wrote " << data.train_contexts.count() << " train contexts, "
      << data.test_contexts.count() << " test contexts, " << data.candidates.count()
      << " candidates (D=" << o.spec.d << ") to " << dir.string() << '\n';
}

struct LabelsOptions {
  std::string contexts, candidates, out;
  std::size_t threads = 1;
};

void run_labels(const LabelsOptions& o, std::ostream& out) {
  const auto contexts = load_matrix(o.contexts, "--contexts");
  const auto candidates = load_matrix(o.candidates, "--candidates");
  require_same_dim(contexts, "--contexts", candidates, "--candidates");
  if (candidates.empty()) throw DataError("--candidates: file holds no candidates");
  const auto labels = build_labels(contexts, candidates, o.threads);
  write_labels(labels, o.out);
  out << "wrote " << labels.size() << " labels to " << o.out << '\n';
}

struct TrainOptions {
  std::string contexts, candidates, labels, out_model;
  TrainConfig cfg;
};

void run_train(const TrainOptions& o, std::ostream& out) {
  auto contexts = load_matrix(o.contexts, "--contexts");
  auto candidates = load_matrix(o.candidates, "--candidates");
  require_same_dim(contexts, "--contexts", candidates, "--candidates");
  if (candidates.empty()) throw DataError("--candidates: file holds no candidates");
  if (contexts.empty()) throw DataError("--contexts: file holds no contexts");

  const auto oracle = build_labels(contexts, candidates, o.cfg.threads);
  if (!o.labels.empty()) {
    std::vector<std::uint32_t> given;
    try {
      given = read_labels(o.labels);
    } catch (const Error& e) {
      throw DataError(std::string("--labels: ") + e.what());
    }
    if (given.size() != oracle.size()) {
      throw DataError("--labels holds " + std::to_string(given.size()) + " labels for " +
                      std::to_string(oracle.size()) + " contexts");
    }
    for (std::size_t i = 0; i < given.size(); ++i) {
      if (given[i] != oracle[i]) {
        throw DataError("--labels: label of context " + std::to_string(i) +
                        " is not the exact-search winner");
      }
    }
  }
  ScreeningTrainSet data{std::move(contexts), std::move(candidates), oracle};
  TrainResult result;
  try {
    result = train_screening(data, o.cfg);
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
  write_model(result.model, o.out_model);
  out << "alternation,loss_before,loss_after,total_subset_size\n";
  for (std::size_t t = 0; t < result.history.size(); ++t) {
    const auto& h = result.history[t];
    out << t << ',' << fmt(h.loss_before, 12) << ',' << fmt(h.loss_after, 12) << ','
        << h.total_subset_size << '\n';
  }
  out << "kept alternation " << result.best_alternation << " (loss " << fmt(result.best_loss, 12)
      << "), wrote " << o.out_model << '\n';
}

struct EvalOptions {
  std::string model, contexts, candidates, report;
  std::size_t threads = 1;
};

void run_eval(const EvalOptions& o, std::ostream& out) {
  const auto model = load_model(o.model);
  const auto contexts = load_matrix(o.contexts, "--contexts");
  const auto candidates = load_matrix(o.candidates, "--candidates");
  require_model_fits(model, candidates);
  require_same_dim(contexts, "--contexts", candidates, "--candidates");
  if (contexts.empty()) throw DataError("--contexts: file holds no contexts");
  const EvalReport rep = evaluate_screening(model, contexts, candidates, o.threads);

  const ConfigComments config{{"model", o.model},
                              {"contexts", o.contexts},
                              {"candidates", o.candidates},
                              {"K", std::to_string(model.num_clusters())},
                              {"lambda", fmt(model.lambda, 6)},
                              {"N", std::to_string(rep.num_candidates)},
                              {"test_contexts", std::to_string(rep.num_contexts)}};
  const auto emit = [&](std::ostream& s) {
    write_comments(s, config);
    s << "K,lambda,accuracy,speedup,mean_subset,top1_agreement,fallbacks\n";
    s << model.num_clusters() << ',' << fmt(model.lambda, 6) << ',' << fmt(rep.accuracy) << ','
      << fmt(rep.speedup_ratio) << ',' << fmt(rep.mean_subset_size) << ','
      << fmt(rep.top1_agreement) << ',' << rep.fallback_count << '\n';
  };
  if (!o.report.empty()) {
    auto file = open_report(o.report);
    emit(file);
  }
  emit(out);
}

struct GridOptions {
  std::string train_contexts, test_contexts, candidates, report;
  std::vector<std::size_t> ks{10, 20, 50};
  std::vector<double> lambdas{1e-5, 5e-6, 1e-6, 5e-7};
  TrainConfig cfg;
};

void run_grid(const GridOptions& o, std::ostream& out) {
  const bool any_file =
      !o.train_contexts.empty() || !o.test_contexts.empty() || !o.candidates.empty();
  EmbeddingMatrix train, test, candidates;
  std::string source;
  if (any_file) {
    if (o.train_contexts.empty() || o.test_contexts.empty() || o.candidates.empty()) {
      throw DataError("--train-contexts, --test-contexts and --candidates must be given together");
    }
    train = load_matrix(o.train_contexts, "--train-contexts");
    test = load_matrix(o.test_contexts, "--test-contexts");
    candidates = load_matrix(o.candidates, "--candidates");
    require_same_dim(train, "--train-contexts", candidates, "--candidates");
    require_same_dim(test, "--test-contexts", candidates, "--candidates");
    if (candidates.empty() || train.empty() || test.empty()) {
      throw DataError("grid needs non-empty train contexts, test contexts and candidates");
    }
    source = o.train_contexts + "|" + o.test_contexts + "|" + o.candidates;
  } else {
    SyntheticSpec spec;
    spec.seed = o.cfg.sgd.seed;
    auto data = gen_synthetic(spec);
    train = std::move(data.train_contexts);
    test = std::move(data.test_contexts);
    candidates = std::move(data.candidates);
    source = "synthetic(m_train=5000,m_test=500,n=1000,d=16,topics=20,sigma=0.3,seed=" +
             std::to_string(spec.seed) + ")";
  }
  const auto data = ScreeningTrainSet::from_embeddings(std::move(train), std::move(candidates),
                                                       o.cfg.threads);
  const auto cells = grid_sweep(data, test, o.ks, o.lambdas, o.cfg);
  const ConfigComments config{{"data", source},
                              {"K", join(o.ks)},
                              {"lambda", join(o.lambdas)},
                              {"T", std::to_string(o.cfg.alternations)},
                              {"lr", fmt(o.cfg.sgd.learning_rate, 6)},
                              {"epochs", std::to_string(o.cfg.sgd.epochs_per_alternation)},
                              {"batch", std::to_string(o.cfg.sgd.batch_size)},
                              {"seed", std::to_string(o.cfg.sgd.seed)}};
  if (!o.report.empty()) {
    auto file = open_report(o.report);
    write_grid_csv(file, cells, config);
  }
  write_grid_csv(out, cells, config);
  out << '\n';
  print_grid_table(out, cells);
}

struct SearchOptions {
  std::string model, context_file, candidates;
  bool exact = false;
  bool screened = false;
};

void run_search(const SearchOptions& o, std::ostream& out) {
  const auto contexts = load_matrix(o.context_file, "--context-file");
  const auto candidates = load_matrix(o.candidates, "--candidates");
  require_same_dim(contexts, "--context-file", candidates, "--candidates");
  if (candidates.empty()) throw DataError("--candidates: file holds no candidates");
  std::optional<ScreeningModel> model;
  if (o.screened) {
    model = load_model(o.model);
    require_model_fits(*model, candidates);
  }
  out << "context,index,score\n";
  for (std::size_t i = 0; i < contexts.count(); ++i) {
    const auto r = o.screened ? screened_search(contexts.row(i), *model, candidates)
                              : exact_argmax(contexts.row(i), candidates);
    out << i << ',' << r.index << ',' << fmt(r.score, 9) << '\n';
  }
}

struct GenPairsOptions {
  std::size_t count = 1000;
  std::size_t features = 16;
  double noise = 1.0;
  std::uint64_t seed = 42;
  std::uint64_t teacher_seed = 7;
  std::string out;
};

void run_gen_pairs(const GenPairsOptions& o, std::ostream& out) {
  const PlantedTeacher teacher(o.features, o.teacher_seed);
  const auto dialogues = gen_dialogues(teacher, o.count, o.noise, o.seed);
  PairFile file{o.features, o.teacher_seed, make_labeled_pairs(dialogues, o.seed)};
  write_pairs(file, o.out);
  out << "wrote " << file.pairs.size() << " labeled pairs (F=" << o.features << ") to " << o.out
      << '\n';
}

struct DistillOptions {
  std::string pairs, out_encoder;
  DistillConfig cfg;
};

void run_distill(const DistillOptions& o, std::ostream& out) {
  PairFile file;
  try {
    file = read_pairs(o.pairs);
  } catch (const Error& e) {
    throw DataError(std::string("--pairs: ") + e.what());
  }
  const PlantedTeacher teacher(file.features, file.teacher_seed);
  DistillResult result;
  try {
    result = train_distilled(file.pairs, std::cref(teacher), o.cfg);
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("--pairs: ") + e.what());
  }
  write_encoder(result.encoder, o.out_encoder);
  out << "epoch,mean_kd_loss\n";
  for (std::size_t e = 0; e < result.loss_trajectory.size(); ++e) {
    out << e << ',' << fmt(result.loss_trajectory[e], 10) << '\n';
  }
  out << "wrote " << o.out_encoder << '\n';
}

struct BenchOptions {
  std::string model, contexts, candidates;
  std::size_t warmup = 100;
  std::size_t iters = 3;
};

void print_stats(std::ostream& out, const char* name, const TimingStats& s) {
  out << name << ',' << fmt(s.mean_ns, 8) << ',' << fmt(s.p50_ns, 8) << ',' << fmt(s.p99_ns, 8)
      << ',' << s.queries << '\n';
}

void run_bench(const BenchOptions& o, std::ostream& out) {
  const auto contexts = load_matrix(o.contexts, "--contexts");
  const auto candidates = load_matrix(o.candidates, "--candidates");
  require_same_dim(contexts, "--contexts", candidates, "--candidates");
  if (candidates.empty()) throw DataError("--candidates: file holds no candidates");
  if (contexts.empty()) throw DataError("--contexts: file holds no contexts");
  out << "# kernels=" << simd::backend_name(simd::active_backend()) << '\n';
  out << "searcher,mean_ns,p50_ns,p99_ns,queries\n";
  const auto exact =
      bench_latency(SearcherKind::kExact, nullptr, contexts, candidates, o.warmup, o.iters);
  print_stats(out, "exact", exact);
  if (!o.model.empty()) {
    const auto model = load_model(o.model);
    require_model_fits(model, candidates);
    const auto screened =
        bench_latency(SearcherKind::kScreened, &model, contexts, candidates, o.warmup, o.iters);
    print_stats(out, "screened", screened);
    out << "# speedup_ratio=" << fmt(speedup_ratio(model, contexts), 6)
        << " wall_clock_speedup=" << fmt(exact.mean_ns / screened.mean_ns, 6) << '\n';
  }
}

// ---------------------------------------------------------------------------

void add_train_flags(CLI::App* cmd, TrainConfig& cfg) {
  cmd->add_option("--t", cfg.alternations, "Alternations T")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", cfg.sgd.learning_rate, "SGD learning rate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", cfg.sgd.epochs_per_alternation, "SGD epochs per alternation");
  cmd->add_option("--batch", cfg.sgd.batch_size, "SGD batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", cfg.sgd.seed, "Seed for k-means and SGD");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned candidate screening for maximum inner product search", "mipscreen"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  std::size_t threads = 1;
  app.add_option("--threads", threads, "Worker cap (0 = all cores); outputs do not depend on it");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate the seeded synthetic embedding set");
  gen_cmd->add_option("--m-train", gen.spec.m_train, "Training contexts");
  gen_cmd->add_option("--m-test", gen.spec.m_test, "Held-out test contexts");
  gen_cmd->add_option("--n", gen.spec.n, "Response candidates");
  gen_cmd->add_option("--d", gen.spec.d, "Embedding dimension");
  gen_cmd->add_option("--topics", gen.spec.topics, "Latent topics");
  gen_cmd->add_option("--sigma", gen.spec.noise_sigma, "Noise norm per vector");
  gen_cmd->add_option("--seed", gen.spec.seed, "Generator seed");
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory");

  LabelsOptions labels;
  auto* labels_cmd = app.add_subcommand("labels", "Exact-search best candidate per context");
  labels_cmd->add_option("--contexts", labels.contexts, "EMB1 contexts")->required();
  labels_cmd->add_option("--candidates", labels.candidates, "EMB1 candidates")->required();
  labels_cmd->add_option("--out", labels.out, "Output label file (one id per line)")->required();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train-screen", "Train a screening model");
  train_cmd->add_option("--contexts", train.contexts, "EMB1 training contexts")->required();
  train_cmd->add_option("--candidates", train.candidates, "EMB1 candidates")->required();
  train_cmd->add_option("--labels", train.labels,
                        "Label file; checked against exact search (computed when omitted)");
  train_cmd->add_option("--k", train.cfg.k, "Clusters K")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lambda", train.cfg.lambda, "Balancing coefficient in (0,1)");
  add_train_flags(train_cmd, train.cfg);
  train_cmd->add_option("--out-model", train.out_model, "Output SCRN model")->required();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval-screen", "Screening accuracy and speedup ratio");
  eval_cmd->add_option("--model", eval.model, "SCRN model")->required();
  eval_cmd->add_option("--contexts", eval.contexts, "EMB1 held-out contexts")->required();
  eval_cmd->add_option("--candidates", eval.candidates, "EMB1 candidates")->required();
  eval_cmd->add_option("--report", eval.report, "CSV report path (also printed)");

  GridOptions grid;
  auto* grid_cmd = app.add_subcommand("grid", "Sweep K x lambda (default synthetic set when no files)");
  grid_cmd->add_option("--train-contexts", grid.train_contexts, "EMB1 training contexts");
  grid_cmd->add_option("--test-contexts", grid.test_contexts, "EMB1 held-out contexts");
  grid_cmd->add_option("--candidates", grid.candidates, "EMB1 candidates");
  grid_cmd->add_option("--k", grid.ks, "Comma-separated K values")->delimiter(',');
  grid_cmd->add_option("--lambda", grid.lambdas, "Comma-separated lambda values")->delimiter(',');
  add_train_flags(grid_cmd, grid.cfg);
  grid_cmd->add_option("--report", grid.report, "CSV report path (also printed)");

  SearchOptions search;
  auto* search_cmd = app.add_subcommand("search", "Best candidate for each context");
  search_cmd->add_option("--model", search.model, "SCRN model (needed with --screened)");
  search_cmd->add_option("--context-file", search.context_file, "EMB1 queries")->required();
  search_cmd->add_option("--candidates", search.candidates, "EMB1 candidates")->required();
  auto* exact_flag = search_cmd->add_flag("--exact", search.exact, "Brute-force search");
  auto* screened_flag =
      search_cmd->add_flag("--screened", search.screened, "Search the predicted subset only");
  exact_flag->excludes(screened_flag);
  screened_flag->needs(search_cmd->get_option("--model"));

  GenPairsOptions gen_pairs;
  auto* gen_pairs_cmd =
      app.add_subcommand("gen-pairs", "Generate labeled pairs from a planted teacher");
  gen_pairs_cmd->add_option("--count", gen_pairs.count, "Dialogues (one positive, one negative each)");
  gen_pairs_cmd->add_option("--f", gen_pairs.features, "Feature dimension F");
  gen_pairs_cmd->add_option("--noise", gen_pairs.noise, "Response noise std");
  gen_pairs_cmd->add_option("--seed", gen_pairs.seed, "Data seed");
  gen_pairs_cmd->add_option("--teacher-seed", gen_pairs.teacher_seed, "Planted teacher seed");
  gen_pairs_cmd->add_option("--out", gen_pairs.out, "Output PRS1 file")->required();

  DistillOptions distill;
  auto* distill_cmd = app.add_subcommand("distill", "Train a dual encoder with distillation");
  distill_cmd->add_option("--pairs", distill.pairs, "PRS1 labeled pairs")->required();
  distill_cmd->add_option("--beta", distill.cfg.beta, "Weight of the teacher L2 term");
  distill_cmd->add_option("--lr", distill.cfg.learning_rate, "SGD learning rate")
      ->check(CLI::PositiveNumber);
  distill_cmd->add_option("--epochs", distill.cfg.epochs, "Epochs");
  distill_cmd->add_option("--batch", distill.cfg.batch_size, "Batch size")
      ->check(CLI::PositiveNumber);
  distill_cmd->add_option("--d", distill.cfg.embedding_dim, "Embedding dimension D")
      ->check(CLI::PositiveNumber);
  distill_cmd->add_option("--seed", distill.cfg.seed, "Initialisation and shuffling seed");
  distill_cmd->add_option("--out-encoder", distill.out_encoder, "Output DENC file")->required();

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Per-query latency of exact vs screened search");
  bench_cmd->add_option("--model", bench.model, "SCRN model (adds the screened searcher)");
  bench_cmd->add_option("--contexts", bench.contexts, "EMB1 queries")->required();
  bench_cmd->add_option("--candidates", bench.candidates, "EMB1 candidates")->required();
  bench_cmd->add_option("--warmup", bench.warmup, "Untimed warmup queries");
  bench_cmd->add_option("--iters", bench.iters, "Timed passes over the queries");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
    if (search_cmd->parsed() && !search.exact && !search.screened) {
      throw CLI::ValidationError("search", "one of --exact or --screened is required");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << sub->help();
    } else {
      err << app.help();
    }
    return 1;
  }

  train.cfg.threads = threads;
  grid.cfg.threads = threads;
  labels.threads = threads;
  eval.threads = threads;

  try {
    if (gen_cmd->parsed()) run_gen(gen, out);
    if (labels_cmd->parsed()) run_labels(labels, out);
    if (train_cmd->parsed()) run_train(train, out);
    if (eval_cmd->parsed()) run_eval(eval, out);
    if (grid_cmd->parsed()) run_grid(grid, out);
    if (search_cmd->parsed()) run_search(search, out);
    if (gen_pairs_cmd->parsed()) run_gen_pairs(gen_pairs, out);
    if (distill_cmd->parsed()) run_distill(distill, out);
    if (bench_cmd->parsed()) run_bench(bench, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace mipscreen::cli
