// Copyright 2026 The ABAE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "abae/abae.hpp"
#include "abae/aspects.hpp"
#include "abae/corpus.hpp"
#include "abae/embeddings.hpp"
#include "abae/error.hpp"
#include "abae/kmeans.hpp"
#include "abae/lda.hpp"
#include "abae/parallel.hpp"
#include "abae/profiles.hpp"
#include "abae/summarize.hpp"

namespace abae::cli {

namespace fs = std::filesystem;

namespace {

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string workdir = "run";
  std::string input;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  // corpus
  std::size_t max_vocabulary = Vocabulary::kDefaultMaxSize;
  bool ascii_filter = false;
  double min_ascii_ratio = 0.9;
  SplitRules split;

  // embeddings
  SgnsConfig sgns;
  bool normalize_embeddings = true;

  // aspect models
  std::size_t aspects = 30;
  AbaeConfig abae;
  std::size_t kmeans_max_iterations = 300;
  double lda_alpha = 0.0;
  double lda_beta = 0.0;
  std::size_t lda_iterations = 200;
  std::size_t lda_infer_iterations = 50;
  std::vector<std::string> methods = {"kmeans", "lda", "abae"};

  // downstream stages
  std::string labels_dir;
  std::string summarize_split = "test";
  std::size_t summary_size = 3;
  std::size_t annotators = 3;
  double overlap_fraction = 795.0 / 4536.0;
  std::vector<std::string> judgments;
  std::string aggregation = "bos";
  double decay_half_life_days = 0.0;
};

void add_options(CLI::App& app, RunConfig& c) {
  app.add_option("--workdir", c.workdir, "Directory holding every stage's inputs and outputs")
      ->capture_default_str();
  app.add_option("--input", c.input, "Raw review file (preprocess)");
  app.add_option("--seed", c.seed, "Seed for every stochastic component")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads (default: ABAE_NUM_THREADS or 1)")
      ->capture_default_str();

  app.add_option("--max-vocabulary", c.max_vocabulary, "Vocabulary cap")->capture_default_str();
  app.add_flag("--ascii-filter,!--no-ascii-filter", c.ascii_filter,
               "Drop sentences that are mostly non-ASCII")
      ->capture_default_str();
  app.add_option("--min-ascii-ratio", c.min_ascii_ratio)->capture_default_str();
  app.add_option("--min-listing-reviews", c.split.min_listing_reviews)->capture_default_str();
  app.add_option("--max-listing-reviews", c.split.max_listing_reviews)->capture_default_str();
  app.add_option("--min-summarize-sentences", c.split.min_summarize_sentences)
      ->capture_default_str();
  app.add_option("--summarize-test-fraction", c.split.summarize_test_fraction)
      ->capture_default_str();
  app.add_option("--min-guest-sentences", c.split.min_guest_sentences)->capture_default_str();
  app.add_option("--rank-val-guests", c.split.rank_val_guests)->capture_default_str();
  app.add_option("--min-rank-test-sentences", c.split.min_rank_test_sentences)
      ->capture_default_str();
  app.add_option("--train-fraction", c.split.train_fraction)->capture_default_str();

  app.add_option("--embedding-dim", c.sgns.dimension, "Word vector size")->capture_default_str();
  app.add_option("--window", c.sgns.window, "Skip-gram window")->capture_default_str();
  app.add_option("--sgns-negatives", c.sgns.negatives)->capture_default_str();
  app.add_option("--sgns-epochs", c.sgns.epochs)->capture_default_str();
  app.add_option("--sgns-learning-rate", c.sgns.initial_learning_rate)->capture_default_str();
  app.add_flag("--normalize-embeddings,!--no-normalize-embeddings", c.normalize_embeddings,
               "Scale word vectors to unit length before k-means and ABAE")
      ->capture_default_str();

  app.add_option("--aspects", c.aspects, "K for ABAE, k-means and LDA")->capture_default_str();
  app.add_option("--batch-size", c.abae.batch_size)->capture_default_str();
  app.add_option("--abae-negatives", c.abae.negatives)->capture_default_str();
  app.add_option("--ortho-weight", c.abae.ortho_weight)->capture_default_str();
  app.add_option("--learning-rate", c.abae.learning_rate, "Adam step size")->capture_default_str();
  app.add_option("--abae-epochs", c.abae.epochs)->capture_default_str();
  app.add_option("--kmeans-max-iterations", c.kmeans_max_iterations)->capture_default_str();
  app.add_option("--lda-alpha", c.lda_alpha, "<= 0 selects 1/K")->capture_default_str();
  app.add_option("--lda-beta", c.lda_beta, "<= 0 selects 1/K")->capture_default_str();
  app.add_option("--lda-iterations", c.lda_iterations)->capture_default_str();
  app.add_option("--lda-infer-iterations", c.lda_infer_iterations)->capture_default_str();
  app.add_option("--methods", c.methods, "Subset of kmeans, lda, abae")
      ->delimiter(',')
      ->capture_default_str();

  app.add_option("--labels-dir", c.labels_dir,
                 "Hand-written cluster labels, <method>.tsv (default: <workdir>/labels)");
  app.add_option("--summarize-split", c.summarize_split, "test or val")->capture_default_str();
  app.add_option("--summary-size", c.summary_size, "Sentences per listing and aspect")
      ->capture_default_str();
  app.add_option("--annotators", c.annotators)->capture_default_str();
  app.add_option("--overlap-fraction", c.overlap_fraction,
                 "Share of examples every annotator judges")
      ->capture_default_str();
  app.add_option("--judgments", c.judgments,
                 "Judged sheets, or directories of annotator_*.tsv (default: <workdir>/sheets)")
      ->delimiter(',');
  app.add_option("--aggregation", c.aggregation, "bos, bor or max_softmax")->capture_default_str();
  app.add_option("--decay-half-life-days", c.decay_half_life_days,
                 "Time-decayed profiles; 0 disables")
      ->capture_default_str();
}

void finalize(RunConfig& c) {
  c.split.seed = c.seed;
  c.sgns.seed = c.seed;
  c.abae.seed = c.seed;
  c.abae.aspects = c.aspects;
  if (c.threads == 0) throw ConfigProblem("threads must be >= 1");
  if (c.workdir.empty()) throw ConfigProblem("workdir must not be empty");
  if (c.aspects == 0) throw ConfigProblem("aspects must be >= 1");
  if (c.max_vocabulary == 0) throw ConfigProblem("max-vocabulary must be >= 1");
  if (c.summary_size == 0) throw ConfigProblem("summary-size must be >= 1");
  if (c.annotators == 0) throw ConfigProblem("annotators must be >= 1");
  if (!(c.overlap_fraction >= 0.0 && c.overlap_fraction <= 1.0)) {
    throw ConfigProblem("overlap-fraction must be in [0, 1]");
  }
  if (c.summarize_split != "test" && c.summarize_split != "val") {
    throw ConfigProblem("summarize-split must be 'test' or 'val'");
  }
  if (c.decay_half_life_days < 0.0) throw ConfigProblem("decay-half-life-days must be >= 0");
  if (c.methods.empty()) throw ConfigProblem("methods must name at least one method");
  std::set<std::string> seen;
  for (const auto& m : c.methods) {
    try {
      parse_method(m);
    } catch (const InvalidArgument& e) {
      throw ConfigProblem(e.what());
    }
    if (!seen.insert(m).second) throw ConfigProblem("method '" + m + "' listed twice");
  }
  try {
    parse_aggregation(c.aggregation);
    c.sgns.validate();
    c.abae.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigProblem(e.what());
  }
}

// ---------------------------------------------------------------- files

std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string fixed4(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

class Stage {
 public:
  Stage(std::string command, const RunConfig& config, std::ostream& log)
      : command_(std::move(command)), config_(config), root_(config.workdir), log_(log) {}

  const RunConfig& config() const { return config_; }
  fs::path path(const std::string& relative) const { return root_ / relative; }

  // Registers an input; a missing file names the stage that produces it.
  fs::path input(const std::string& relative, const std::string& producer) {
    const fs::path p = path(relative);
    if (!fs::is_regular_file(p)) {
      throw MissingInput("missing input " + p.string() + " (run '" + producer + "' first)");
    }
    inputs_.insert(relative);
    return p;
  }

  fs::path external_input(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw MissingInput("missing input " + p.string() + " (" + what + ")");
    external_.insert(p.string());
    return p;
  }

  std::ifstream open(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    return in;
  }

  template <typename Fn>
  void write(const std::string& relative, Fn fn) {
    const fs::path p = path(relative);
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    fn(out);
    out.flush();
    if (!out) throw IoError("error writing " + p.string());
    outputs_.insert(relative);
  }

  void note(const std::string& message) { log_ << command_ << ": " << message << '\n'; }

  void settings(const std::string& key, nlohmann::json value) { settings_[key] = std::move(value); }

  void write_manifest() {
    nlohmann::ordered_json m;
    m["command"] = command_;
    m["version"] = "0.1.0";
    m["settings"] = settings_;
    auto files = [&](const std::set<std::string>& names, bool relative) {
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      for (const auto& n : names) {
        list.push_back({{"path", n}, {"fnv1a64", fnv1a_file(relative ? path(n) : fs::path(n))}});
      }
      return list;
    };
    m["inputs"] = files(inputs_, true);
    if (!external_.empty()) m["external_inputs"] = files(external_, false);
    m["outputs"] = files(outputs_, true);
    const std::string name = "manifests/" + command_ + ".json";
    const fs::path p = path(name);
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << m.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + p.string());
  }

 private:
  std::string command_;
  const RunConfig& config_;
  fs::path root_;
  std::ostream& log_;
  std::set<std::string> inputs_;
  std::set<std::string> external_;
  std::set<std::string> outputs_;
  nlohmann::json settings_ = nlohmann::json::object();
};

// ------------------------------------------------------------- loading

Vocabulary load_vocabulary(Stage& s) {
  auto in = s.open(s.input("vocab.tsv", "preprocess"));
  return Vocabulary::read(in, s.config().max_vocabulary);
}

EncodedCorpus load_corpus(Stage& s, const std::string& relative) {
  auto in = s.open(s.input(relative, "preprocess"));
  return EncodedCorpus::read(in);
}

EmbeddingTable load_embeddings(Stage& s) {
  auto in = s.open(s.input("embeddings.txt", "train-embeddings"));
  EmbeddingTable table = read_word2vec_text(in);
  if (s.config().normalize_embeddings) {
    for (std::size_t r = 0; r < table.input.rows(); ++r) {
      auto row = table.input.row(r);
      const double n = norm(row);
      if (n > 0.0) scale(1.0 / n, row);
    }
  }
  return table;
}

KMeansModel load_kmeans(Stage& s) {
  auto in = s.open(s.input("kmeans.txt", "fit-kmeans"));
  return read_kmeans(in);
}

// Keeps every loaded artifact alive behind one AspectModel.
struct LoadedModel {
  Method method = Method::abae;
  std::optional<EmbeddingTable> embeddings;
  std::optional<KMeansModel> kmeans;
  std::optional<LdaModel> lda;
  std::optional<AbaeModel> abae;
  std::unique_ptr<AspectModel> model;
};

std::unique_ptr<LoadedModel> load_model(Stage& s, Method method) {
  auto m = std::make_unique<LoadedModel>();
  m->method = method;
  switch (method) {
    case Method::kmeans:
      m->embeddings = load_embeddings(s);
      m->kmeans = load_kmeans(s);
      m->model = std::make_unique<KMeansAspectModel>(*m->kmeans, m->embeddings->input);
      break;
    case Method::lda: {
      auto in = s.open(s.input("lda.txt", "fit-lda"));
      m->lda = read_lda(in);
      m->model = std::make_unique<LdaAspectModel>(*m->lda, s.config().lda_infer_iterations,
                                                  s.config().seed);
      break;
    }
    case Method::abae: {
      m->embeddings = load_embeddings(s);
      auto in = s.open(s.input("abae.ckpt", "train-abae"));
      m->abae = load_checkpoint(in, *m->embeddings);
      m->model = std::make_unique<AbaeAspectModel>(*m->abae);
      break;
    }
  }
  return m;
}

std::vector<Method> methods_of(const RunConfig& c) {
  std::vector<Method> out;
  for (const auto& m : c.methods) out.push_back(parse_method(m));
  return out;
}

std::vector<AspectDistribution> infer_all(const AspectModel& model, const EncodedCorpus& corpus,
                                          std::size_t threads) {
  std::vector<AspectDistribution> out(corpus.size());
  parallel_for(corpus.size(), threads,
               [&](std::size_t i) { out[i] = model.infer(corpus[i].token_ids); });
  return out;
}

nlohmann::json split_settings(const SplitRules& r) {
  return {{"min_listing_reviews", r.min_listing_reviews},
          {"max_listing_reviews", r.max_listing_reviews},
          {"min_summarize_sentences", r.min_summarize_sentences},
          {"summarize_test_fraction", r.summarize_test_fraction},
          {"min_guest_sentences", r.min_guest_sentences},
          {"rank_val_guests", r.rank_val_guests},
          {"min_rank_test_sentences", r.min_rank_test_sentences},
          {"train_fraction", r.train_fraction},
          {"seed", r.seed}};
}

// ------------------------------------------------------------ commands

void write_stats_row(std::ostream& out, const std::string& name, const CorpusStats& st) {
  out << name << '\t' << st.sentences << '\t' << st.tokens << '\t' << st.reviews << '\t'
      << st.listings << '\t' << st.guests << '\n';
}

void cmd_preprocess(Stage& s) {
  const auto& c = s.config();
  if (c.input.empty()) throw ConfigProblem("preprocess needs --input (the raw review file)");
  auto in = s.open(s.external_input(c.input, "raw review file"));
  const auto reviews = read_reviews(in);
  PreprocessOptions options;
  options.max_vocabulary = c.max_vocabulary;
  options.ascii_filter = c.ascii_filter;
  options.min_ascii_ratio = c.min_ascii_ratio;
  auto [vocabulary, corpus] = preprocess(reviews, options);
  const auto splits = split_datasets(corpus, c.split);

  s.settings("max_vocabulary", c.max_vocabulary);
  s.settings("ascii_filter", c.ascii_filter);
  s.settings("min_ascii_ratio", c.min_ascii_ratio);
  s.settings("split", split_settings(c.split));

  s.write("vocab.tsv", [&](std::ostream& out) { vocabulary.write(out); });
  s.write("corpus.enc", [&](std::ostream& out) { corpus.write(out); });
  const std::pair<const char*, const EncodedCorpus*> parts[] = {
      {"train", &splits.train},
      {"summarize_val", &splits.summarize_val},
      {"summarize_test", &splits.summarize_test},
      {"rank_val", &splits.rank_val},
      {"rank_test", &splits.rank_test}};
  for (const auto& [name, part] : parts) {
    s.write(std::string("splits/") + name + ".enc", [&](std::ostream& out) { part->write(out); });
  }
  s.write("stats.tsv", [&](std::ostream& out) {
    out << "dataset\tsentences\ttokens\treviews\tlistings\tguests\n";
    write_stats_row(out, "all", corpus.stats());
    for (const auto& [name, part] : parts) write_stats_row(out, name, part->stats());
  });
  s.note(std::to_string(reviews.size()) + " reviews, " + std::to_string(corpus.size()) +
         " sentences, vocabulary " + std::to_string(vocabulary.size()));
}

void cmd_train_embeddings(Stage& s) {
  const auto& c = s.config();
  const auto vocabulary = load_vocabulary(s);
  const auto train = load_corpus(s, "splits/train.enc");
  std::vector<double> losses;
  const auto table = train_embeddings(train, vocabulary, c.sgns, &losses);
  s.settings("dimension", c.sgns.dimension);
  s.settings("window", c.sgns.window);
  s.settings("negatives", c.sgns.negatives);
  s.settings("epochs", c.sgns.epochs);
  s.settings("learning_rate", c.sgns.initial_learning_rate);
  s.settings("seed", c.sgns.seed);
  s.write("embeddings.txt", [&](std::ostream& out) { write_word2vec_text(out, table); });
  s.write("embeddings_history.tsv", [&](std::ostream& out) {
    out << "epoch\tmean_loss\n";
    for (std::size_t e = 0; e < losses.size(); ++e) out << e + 1 << '\t' << format_double(losses[e]) << '\n';
  });
  s.note("trained " + std::to_string(table.size()) + " x " + std::to_string(table.dimension()) +
         " embeddings");
}

void cmd_fit_kmeans(Stage& s) {
  const auto& c = s.config();
  const auto table = load_embeddings(s);
  KMeansOptions options;
  options.clusters = c.aspects;
  options.seed = c.seed;
  options.max_iterations = c.kmeans_max_iterations;
  const auto model = kmeans_fit(table.input, options);
  s.settings("clusters", c.aspects);
  s.settings("seed", c.seed);
  s.settings("max_iterations", c.kmeans_max_iterations);
  s.settings("normalize_embeddings", c.normalize_embeddings);
  s.write("kmeans.txt", [&](std::ostream& out) { write_kmeans(out, model); });
  s.write("kmeans_history.tsv", [&](std::ostream& out) {
    out << "iteration\tinertia\n";
    for (std::size_t i = 0; i < model.inertia_history.size(); ++i) {
      out << i + 1 << '\t' << format_double(model.inertia_history[i]) << '\n';
    }
  });
  s.note(std::to_string(model.inertia_history.size()) + " Lloyd iterations");
}

void cmd_fit_lda(Stage& s) {
  const auto& c = s.config();
  const auto vocabulary = load_vocabulary(s);
  const auto train = load_corpus(s, "splits/train.enc");
  LdaOptions options;
  options.topics = c.aspects;
  options.alpha = c.lda_alpha;
  options.beta = c.lda_beta;
  options.iterations = c.lda_iterations;
  options.seed = c.seed;
  const auto docs = train.token_lists();
  const auto model = lda_fit(docs, vocabulary.size(), options);
  s.settings("topics", c.aspects);
  s.settings("alpha", model.alpha);
  s.settings("beta", model.beta);
  s.settings("iterations", c.lda_iterations);
  s.settings("seed", c.seed);
  s.write("lda.txt", [&](std::ostream& out) { write_lda(out, model); });
  s.note("fitted " + std::to_string(model.topics) + " topics");
}

void cmd_train_abae(Stage& s) {
  const auto& c = s.config();
  const auto table = load_embeddings(s);
  const auto kmeans = load_kmeans(s);
  const auto train = load_corpus(s, "splits/train.enc");
  std::vector<double> history;
  const auto model = train_abae(train, table, kmeans, c.abae, &history);
  s.settings("aspects", c.abae.aspects);
  s.settings("batch_size", c.abae.batch_size);
  s.settings("negatives", c.abae.negatives);
  s.settings("ortho_weight", c.abae.ortho_weight);
  s.settings("learning_rate", c.abae.learning_rate);
  s.settings("epochs", c.abae.epochs);
  s.settings("seed", c.abae.seed);
  s.settings("normalize_embeddings", c.normalize_embeddings);
  s.write("abae.ckpt", [&](std::ostream& out) { save_checkpoint(out, model); });
  s.write("abae_history.tsv", [&](std::ostream& out) {
    out << "epoch\tmean_objective\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
      out << e + 1 << '\t' << format_double(history[e]) << '\n';
    }
  });
  s.note("trained ABAE for " + std::to_string(history.size()) + " epochs, orthogonality penalty " +
         fixed4(orthogonality_penalty(model.aspects)));
}

void cmd_coherence(Stage& s) {
  const auto& c = s.config();
  const auto vocabulary = load_vocabulary(s);
  const auto corpus = load_corpus(s, "corpus.enc");
  const auto docs = corpus.token_lists();
  const DocumentIndex index(docs, vocabulary.size());
  const auto names = vocabulary.words();
  const std::size_t depth = kCoherenceWordCounts.back();
  for (Method method : methods_of(c)) {
    const auto loaded = load_model(s, method);
    const auto& model = *loaded->model;
    const auto report = coherence_report(model, index, {names.begin(), names.end()});
    const std::string m(to_string(method));
    s.write("coherence_" + m + ".tsv", [&](std::ostream& out) { write_coherence_report(out, report); });
    s.write("top_words_" + m + ".tsv", [&](std::ostream& out) {
      out << "aspect\trank\tword\n";
      for (std::size_t k = 0; k < model.num_aspects(); ++k) {
        const auto words = model.top_words(k, std::min(depth, model.vocabulary_size()));
        for (std::size_t r = 0; r < words.size(); ++r) {
          out << k << '\t' << r + 1 << '\t' << vocabulary.word(words[r]) << '\n';
        }
      }
    });
    s.note(m + " total coherence " + fixed4(report.total()));
  }
  s.settings("methods", c.methods);
  s.settings("documents", "corpus.enc sentences");
}

AspectLabeling load_labeling(Stage& s, Method method, std::size_t clusters) {
  auto in = s.open(s.input("labeling_" + std::string(to_string(method)) + ".tsv", "label-aspects"));
  return read_labeling(in, method, clusters);
}

void cmd_label_aspects(Stage& s) {
  const auto& c = s.config();
  const auto train = load_corpus(s, "splits/train.enc");
  std::vector<TokenIds> sentences;
  for (const auto& sentence : train.sentences()) sentences.emplace_back(sentence.token_ids);
  const fs::path dir = c.labels_dir.empty() ? s.path("labels") : fs::path(c.labels_dir);
  for (Method method : methods_of(c)) {
    const std::string m(to_string(method));
    const auto loaded = load_model(s, method);
    auto in = s.open(s.external_input(dir / (m + ".tsv"), "hand-written cluster labels for " + m));
    const auto labeling = read_labeling(in, method, loaded->model->num_aspects());
    const auto shares = aspect_prevalence(sentences, labeling, *loaded->model);
    s.write("labeling_" + m + ".tsv", [&](std::ostream& out) { write_labeling(out, labeling); });
    s.write("prevalence_" + m + ".tsv", [&](std::ostream& out) {
      out << "label\tshare\n";
      for (std::size_t i = 0; i < kAllLabels.size(); ++i) {
        out << to_string(kAllLabels[i]) << '\t' << fixed4(shares[i]) << '\n';
      }
    });
  }
  s.settings("methods", c.methods);
}

void cmd_summarize(Stage& s) {
  const auto& c = s.config();
  const auto corpus = load_corpus(s, "splits/summarize_" + c.summarize_split + ".enc");
  std::vector<ExtractedSentence> extracted;
  std::size_t short_groups = 0;
  for (Method method : methods_of(c)) {
    const auto loaded = load_model(s, method);
    const auto labeling = load_labeling(s, method, loaded->model->num_aspects());
    for (AspectLabel label : kTargetLabels) {
      if (labeling.clusters_for(label).empty()) {
        s.note(std::string(to_string(method)) + ": no cluster labeled " +
               std::string(to_string(label)) + ", skipped");
        continue;
      }
      for (const auto& [listing, indexes] : corpus.by_listing()) {
        std::vector<CandidateSentence> candidates;
        for (std::size_t i : indexes) candidates.push_back({corpus[i].text, corpus[i].token_ids});
        auto result = extract_top_sentences(listing, candidates, label, *loaded->model, labeling,
                                            c.summary_size);
        if (result.short_listing) ++short_groups;
        extracted.insert(extracted.end(), result.sentences.begin(), result.sentences.end());
      }
    }
  }
  if (short_groups > 0) {
    s.note(std::to_string(short_groups) + " listing groups had fewer than " +
           std::to_string(c.summary_size) + " sentences");
  }
  SheetOptions options;
  options.annotators = c.annotators;
  options.overlap_fraction = c.overlap_fraction;
  options.seed = c.seed;
  const auto sheets = build_evaluation_sheet(extracted, options);

  s.write("extracted.tsv", [&](std::ostream& out) {
    out << "listing_id\taspect\tmethod\trank\tscore\tsentence\n";
    for (const auto& e : extracted) {
      std::string text = e.text;
      std::replace(text.begin(), text.end(), '\t', ' ');
      out << e.listing_id << '\t' << to_string(e.aspect) << '\t' << to_string(e.method) << '\t'
          << e.rank << '\t' << format_double(e.score) << '\t' << text << '\n';
    }
  });
  s.write("sheets/key.tsv", [&](std::ostream& out) { write_key(out, sheets.key); });
  std::map<std::string, std::vector<SheetRow>> by_annotator;
  for (const auto& row : sheets.rows) by_annotator[row.annotator].push_back(row);
  for (const auto& [annotator, rows] : by_annotator) {
    s.write("sheets/annotator_" + annotator + ".tsv", [&](std::ostream& out) { write_sheet(out, rows); });
  }
  s.settings("methods", c.methods);
  s.settings("split", c.summarize_split);
  s.settings("summary_size", c.summary_size);
  s.settings("annotators", c.annotators);
  s.settings("overlap_fraction", c.overlap_fraction);
  s.settings("seed", c.seed);
  s.note(std::to_string(sheets.key.size()) + " examples");
}

void cmd_eval_judgments(Stage& s) {
  const auto& c = s.config();
  auto key_in = s.open(s.input("sheets/key.tsv", "summarize"));
  const auto key = read_key(key_in);
  std::vector<SheetRow> judged;
  std::vector<fs::path> files;
  auto sheets_in = [&](const fs::path& dir) {
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("annotator_", 0) == 0) found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    if (found.empty()) throw MissingInput("no annotator_*.tsv sheets under " + dir.string());
    files.insert(files.end(), found.begin(), found.end());
  };
  if (c.judgments.empty()) {
    const fs::path dir = s.path("sheets");
    if (!fs::is_directory(dir)) throw MissingInput("missing input " + dir.string() + " (run 'summarize' first)");
    sheets_in(dir);
  } else {
    for (const auto& j : c.judgments) {
      if (fs::is_directory(j)) {
        sheets_in(j);
      } else {
        files.emplace_back(j);
      }
    }
  }
  for (const auto& f : files) {
    auto in = s.open(s.external_input(f, "judged sheet"));
    try {
      auto rows = read_sheet(in);
      judged.insert(judged.end(), rows.begin(), rows.end());
    } catch (const FormatError& e) {
      throw FormatError(f.string() + ": " + e.what());
    }
  }
  const auto summary = evaluate_judgments(key, judged);
  s.write("precision.tsv", [&](std::ostream& out) { write_precision_table(out, summary); });
  s.note("kappa over " + std::to_string(summary.kappa_items) + " shared examples");
}

std::string profile_file(Method m) { return "profiles_" + std::string(to_string(m)) + ".tsv"; }

void cmd_profile(Stage& s) {
  const auto& c = s.config();
  const auto guests = load_corpus(s, "splits/rank_val.enc");
  const Aggregation aggregation = parse_aggregation(c.aggregation);
  for (Method method : methods_of(c)) {
    const auto loaded = load_model(s, method);
    const auto dists = infer_all(*loaded->model, guests, c.threads);
    std::vector<GuestProfile> profiles;
    for (const auto& [guest, indexes] : guests.by_guest()) {
      std::vector<AspectDistribution> sentences;
      for (std::size_t i : indexes) sentences.push_back(dists[i]);
      if (c.decay_half_life_days > 0.0) {
        std::chrono::sys_days latest{};
        for (std::size_t i : indexes) latest = std::max(latest, std::chrono::sys_days{guests[i].date});
        std::vector<double> ages;
        for (std::size_t i : indexes) {
          ages.push_back(static_cast<double>((latest - std::chrono::sys_days{guests[i].date}).count()));
        }
        profiles.push_back(aggregate_time_decayed(guest, sentences, ages, c.decay_half_life_days));
        continue;
      }
      switch (aggregation) {
        case Aggregation::bos:
          profiles.push_back(aggregate_bos(guest, sentences));
          break;
        case Aggregation::max_softmax:
          profiles.push_back(aggregate_max_softmax(guest, sentences));
          break;
        case Aggregation::bor: {
          std::map<std::string, std::vector<AspectDistribution>> reviews;
          for (std::size_t i : indexes) reviews[guests[i].review_id].push_back(dists[i]);
          std::vector<std::vector<AspectDistribution>> grouped;
          for (auto& [id, list] : reviews) grouped.push_back(std::move(list));
          profiles.push_back(aggregate_bor(guest, grouped));
          break;
        }
      }
    }
    s.write(profile_file(method), [&](std::ostream& out) { write_profiles(out, profiles); });
    s.note(std::string(to_string(method)) + ": " + std::to_string(profiles.size()) + " profiles");
  }
  s.settings("methods", c.methods);
  s.settings("aggregation", c.aggregation);
  s.settings("decay_half_life_days", c.decay_half_life_days);
}

void cmd_rerank_eval(Stage& s) {
  const auto& c = s.config();
  const auto test = load_corpus(s, "splits/rank_test.enc");
  for (Method method : methods_of(c)) {
    const std::string m(to_string(method));
    auto pin = s.open(s.input(profile_file(method), "profile"));
    const auto profiles = read_profiles(pin);
    const auto loaded = load_model(s, method);
    const auto dists = infer_all(*loaded->model, test, c.threads);

    std::vector<ListingItem> listings;
    for (const auto& [listing_id, indexes] : test.by_listing()) {
      ListingItem listing{listing_id, {}};
      std::map<std::string, std::size_t> review_slot;
      for (std::size_t i : indexes) {
        const auto& sentence = test[i];
        auto [it, added] = review_slot.emplace(sentence.review_id, listing.reviews.size());
        if (added) listing.reviews.push_back({sentence.review_id, {}});
        listing.reviews[it->second].sentences.push_back(
            {sentence.review_id + "#" + std::to_string(sentence.position), dists[i]});
      }
      listings.push_back(std::move(listing));
    }

    std::vector<PairwiseResult> results;
    for (ObjectKind kind : kAllObjectKinds) {
      results.push_back(pairwise_experiment(profiles, listings, kind, c.threads));
    }
    s.write("scatter_" + m + ".tsv", [&](std::ostream& out) {
      write_scatter_header(out);
      for (const auto& r : results) write_scatter(out, r, m);
    });
    s.write("r2_" + m + ".tsv", [&](std::ostream& out) {
      out << "kind\tpoints\tlistings\tintercept\tslope\tr2\n";
      for (const auto& r : results) {
        out << to_string(r.kind) << '\t' << r.points.size() << '\t' << r.listings_used << '\t'
            << format_double(r.fit.intercept) << '\t' << format_double(r.fit.slope) << '\t'
            << format_double(r.fit.r2) << '\n';
      }
    });
    const auto objects = listing_objects(listings);
    s.write("ranked_" + m + ".tsv", [&](std::ostream& out) {
      write_ranked_header(out);
      for (const auto& p : profiles) {
        write_ranked(out, p.guest_id, rank_objects(p.distribution, objects, ObjectKind::listing));
      }
    });
    s.note(m + ": R2 listing/review/sentence = " + fixed4(results[0].fit.r2) + "/" +
           fixed4(results[1].fit.r2) + "/" + fixed4(results[2].fit.r2));
  }
  s.settings("methods", c.methods);
}

std::vector<std::vector<std::string>> read_table(Stage& s, const std::string& relative,
                                                 const std::string& producer) {
  auto in = s.open(s.input(relative, producer));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

void markdown_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return;
  auto line = [&](const std::vector<std::string>& r) {
    out << '|';
    for (const auto& f : r) out << ' ' << f << " |";
    out << '\n';
  };
  line(rows.front());
  out << '|';
  for (std::size_t i = 0; i < rows.front().size(); ++i) out << " --- |";
  out << '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) line(rows[i]);
  out << '\n';
}

void cmd_report(Stage& s) {
  const auto& c = s.config();
  // Read everything first so a missing stage fails before anything is written.
  const auto stats = read_table(s, "stats.tsv", "preprocess");
  std::map<std::string, std::vector<std::vector<std::string>>> coherence, prevalence, r2;
  for (const auto& m : c.methods) {
    coherence[m] = read_table(s, "coherence_" + m + ".tsv", "coherence");
    prevalence[m] = read_table(s, "prevalence_" + m + ".tsv", "label-aspects");
    r2[m] = read_table(s, "r2_" + m + ".tsv", "rerank-eval");
  }
  const auto precision = read_table(s, "precision.tsv", "eval-judgments");

  s.write("report.md", [&](std::ostream& out) {
    out << "# Aspect extraction run report\n\n## Corpus\n\n";
    markdown_table(out, stats);
    out << "## Coherence (sum over aspects)\n\n";
    std::vector<std::vector<std::string>> coh = {{"method", "10 words", "30 words", "50 words", "sum"}};
    for (const auto& m : c.methods) {
      for (const auto& row : coherence[m]) {
        if (!row.empty() && row[0] == "total") {
          std::vector<std::string> r = {m};
          r.insert(r.end(), row.begin() + 1, row.end());
          coh.push_back(r);
        }
      }
    }
    markdown_table(out, coh);
    out << "## Aspect prevalence\n\n";
    std::vector<std::vector<std::string>> prev = {{"method"}};
    for (AspectLabel l : kAllLabels) prev[0].emplace_back(to_string(l));
    for (const auto& m : c.methods) {
      std::vector<std::string> r = {m};
      for (std::size_t i = 1; i < prevalence[m].size(); ++i) r.push_back(prevalence[m][i].at(1));
      prev.push_back(r);
    }
    markdown_table(out, prev);
    out << "## Summaries: precision@1 / precision@3\n\n";
    std::vector<std::vector<std::string>> table;
    std::string kappa;
    for (const auto& row : precision) {
      if (!row.empty() && row[0] == "fleiss_kappa") {
        kappa = row.size() > 1 ? row[1] : "n/a";
      } else {
        table.push_back(row);
      }
    }
    markdown_table(out, table);
    out << "Fleiss' kappa: " << kappa << "\n\n";
    out << "## Profile distance vs ranking agreement\n\n";
    std::vector<std::vector<std::string>> fits = {{"method", "kind", "points", "slope", "R2"}};
    for (const auto& m : c.methods) {
      for (std::size_t i = 1; i < r2[m].size(); ++i) {
        const auto& row = r2[m][i];
        fits.push_back({m, row.at(0), row.at(1), fixed4(std::stod(row.at(4))),
                        fixed4(std::stod(row.at(5)))});
      }
    }
    markdown_table(out, fits);
  });
  s.settings("methods", c.methods);
}

using Handler = void (*)(Stage&);

const std::map<std::string, std::pair<Handler, const char*>>& handlers() {
  static const std::map<std::string, std::pair<Handler, const char*>> table = {
      {"preprocess", {cmd_preprocess, "Segment, tokenize, build the vocabulary and split datasets"}},
      {"train-embeddings", {cmd_train_embeddings, "Train skip-gram word embeddings"}},
      {"fit-kmeans", {cmd_fit_kmeans, "Cluster the word embeddings with k-means"}},
      {"fit-lda", {cmd_fit_lda, "Fit LDA by collapsed Gibbs sampling"}},
      {"train-abae", {cmd_train_abae, "Train the attention-based aspect autoencoder"}},
      {"coherence", {cmd_coherence, "Top words and coherence tables per method"}},
      {"label-aspects", {cmd_label_aspects, "Apply hand-written cluster labels; prevalence"}},
      {"summarize", {cmd_summarize, "Extract top sentences and build annotator sheets"}},
      {"eval-judgments", {cmd_eval_judgments, "Precision@k and Fleiss' kappa from judged sheets"}},
      {"profile", {cmd_profile, "Aggregate guest profiles"}},
      {"rerank-eval", {cmd_rerank_eval, "Pairwise profile distance vs ranking correlation"}},
      {"report", {cmd_report, "Summarize every stage's results in report.md"}},
  };
  return table;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
      !handlers().contains(args.front())) {
    err << "abae: unknown command '" << args.front() << "'\n";
    return kUnknownCommand;
  }

  CLI::App app{"Aspect extraction, summarization and profile reranking pipeline", "abae"};
  app.set_config("--config", "", "Flat TOML run configuration; command-line flags win");
  app.allow_config_extras(false);
  app.require_subcommand(1);
  RunConfig config;
  config.threads = default_thread_count();
  add_options(app, config);
  for (const auto& [name, entry] : handlers()) app.add_subcommand(name, entry.second)->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    finalize(config);
    Stage stage(command, config, err);
    handlers().at(command).first(stage);
    stage.write_manifest();
  } catch (const ConfigProblem& e) {
    err << "abae " << command << ": config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const MissingInput& e) {
    err << "abae " << command << ": " << e.what() << '\n';
    return kMissingInput;
  } catch (const std::exception& e) {
    err << "abae " << command << ": " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace abae::cli
