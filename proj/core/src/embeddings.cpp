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

#include "abae/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "abae/error.hpp"

namespace abae {

void SgnsConfig::validate() const {
  if (dimension < 1) throw InvalidArgument("sgns: dimension must be >= 1");
  if (window < 1) throw InvalidArgument("sgns: window must be >= 1");
  if (negatives < 1) throw InvalidArgument("sgns: negatives must be >= 1");
  if (!(initial_learning_rate > 0.0)) throw InvalidArgument("sgns: learning rate must be > 0");
}

std::optional<int> EmbeddingTable::id_of(const std::string& word) const {
  const auto it = std::find(words.begin(), words.end(), word);
  if (it == words.end()) return std::nullopt;
  return static_cast<int>(it - words.begin());
}

std::vector<TrainingPair> generate_training_pairs(TokenIds sentence, std::size_t window,
                                                  Rng* rng) {
  if (window < 1) throw InvalidArgument("generate_training_pairs: window must be >= 1");
  std::vector<TrainingPair> pairs;
  const std::size_t n = sentence.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t w = rng ? 1 + uniform_index(*rng, window) : window;
    const std::size_t lo = i >= w ? i - w : 0;
    const std::size_t hi = std::min(n - 1, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) pairs.emplace_back(sentence[i], sentence[j]);
    }
  }
  return pairs;
}

std::vector<double> negative_sampling_distribution(std::span<const std::int64_t> frequencies,
                                                   double power) {
  if (frequencies.empty()) throw InvalidArgument("negative_sampling_distribution: empty vocabulary");
  std::vector<double> p(frequencies.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (frequencies[i] < 1) {
      throw InvalidArgument("negative_sampling_distribution: frequency < 1 at id " +
                            std::to_string(i));
    }
    p[i] = std::pow(static_cast<double>(frequencies[i]), power);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

AliasSampler::AliasSampler(std::span<const double> probabilities)
    : probability_(probabilities.size()), alias_(probabilities.size(), 0) {
  const std::size_t n = probabilities.size();
  if (n == 0) throw InvalidArgument("AliasSampler: empty distribution");
  std::vector<double> scaled(n);
  std::vector<int> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probabilities[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    small.pop_back();
    const int l = large.back();
    probability_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = scaled[l] + scaled[s] - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int i : large) probability_[i] = 1.0;
  for (int i : small) probability_[i] = 1.0;
}

int AliasSampler::sample(Rng& rng) const {
  const std::size_t column = uniform_index(rng, probability_.size());
  return uniform_real(rng, 0.0, 1.0) < probability_[column] ? static_cast<int>(column)
                                                            : alias_[column];
}

namespace {

void check_id(int id, std::size_t n, const char* what) {
  if (id < 0 || static_cast<std::size_t>(id) >= n) {
    throw InvalidArgument(std::string("sgns: ") + what + " id " + std::to_string(id) +
                          " out of range");
  }
}

void check_ids(int center, int context, std::span<const int> negatives,
               const EmbeddingTable& table) {
  const std::size_t n = table.input.rows();
  if (table.output.rows() != n || table.output.cols() != table.input.cols()) {
    throw InvalidArgument("sgns: input/output tables differ in shape");
  }
  check_id(center, n, "center");
  check_id(context, n, "context");
  for (int neg : negatives) check_id(neg, n, "negative");
}

// -log sigmoid(x), stable for large |x|.
double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

}  // namespace

double sgns_loss(int center, int context, std::span<const int> negatives,
                 const EmbeddingTable& table) {
  check_ids(center, context, negatives, table);
  const auto v = table.input.row(static_cast<std::size_t>(center));
  double loss = neg_log_sigmoid(dot(table.output.row(static_cast<std::size_t>(context)), v));
  for (int neg : negatives) {
    loss += neg_log_sigmoid(-dot(table.output.row(static_cast<std::size_t>(neg)), v));
  }
  return loss;
}

double sgns_train_step(int center, int context, std::span<const int> negatives,
                       EmbeddingTable& table, double learning_rate) {
  check_ids(center, context, negatives, table);
  const std::size_t d = table.dimension();
  auto v = table.input.row(static_cast<std::size_t>(center));
  Vector grad_v(d, 0.0);

  // Targets and their coefficients d loss / d score; duplicates accumulate.
  std::vector<std::pair<int, double>> coeffs;
  coeffs.reserve(negatives.size() + 1);
  double loss = 0.0;
  {
    const double score = dot(table.output.row(static_cast<std::size_t>(context)), v);
    loss += neg_log_sigmoid(score);
    coeffs.emplace_back(context, sigmoid(score) - 1.0);
  }
  for (int neg : negatives) {
    const double score = dot(table.output.row(static_cast<std::size_t>(neg)), v);
    loss += neg_log_sigmoid(-score);
    coeffs.emplace_back(neg, sigmoid(score));
  }
  for (const auto& [id, g] : coeffs) axpy(g, table.output.row(static_cast<std::size_t>(id)), grad_v);
  const Vector v_before(v.begin(), v.end());
  for (const auto& [id, g] : coeffs) {
    axpy(-learning_rate * g, v_before, table.output.row(static_cast<std::size_t>(id)));
  }
  axpy(-learning_rate, grad_v, v);
  return loss;
}

EmbeddingTable train_embeddings(const EncodedCorpus& corpus, const Vocabulary& vocabulary,
                                const SgnsConfig& config, std::vector<double>* epoch_losses) {
  config.validate();
  if (corpus.empty()) throw InvalidArgument("train_embeddings: empty corpus");
  const std::size_t vocab_size = vocabulary.size();
  std::size_t total_tokens = 0;
  for (const auto& s : corpus.sentences()) {
    for (int id : s.token_ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
        throw InvalidArgument("train_embeddings: token id " + std::to_string(id) +
                              " outside the vocabulary of size " + std::to_string(vocab_size));
      }
    }
    total_tokens += s.token_ids.size();
  }

  Rng rng(config.seed);
  const std::size_t d = config.dimension;
  EmbeddingTable table;
  table.words.assign(vocabulary.words().begin(), vocabulary.words().end());
  table.input = Matrix(vocab_size, d);
  table.output = Matrix(vocab_size, d, 0.0);
  for (double& x : table.input.values()) {
    x = uniform_real(rng, -0.5, 0.5) / static_cast<double>(d);
  }

  const AliasSampler noise(negative_sampling_distribution(vocabulary.frequencies(), config.unigram_power));
  auto keep = [&](int id) { return vocabulary.frequency(id) >= config.min_count; };

  const double total_work = static_cast<double>(config.epochs * total_tokens);
  const double min_lr = config.initial_learning_rate * config.min_learning_rate_fraction;
  std::size_t processed = 0;
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<int> negatives(config.negatives);
  std::vector<int> kept;

  if (epoch_losses) epoch_losses->clear();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t pair_count = 0;
    for (std::size_t idx : order) {
      const auto& ids = corpus[idx].token_ids;
      kept.clear();
      for (int id : ids) {
        if (keep(id)) kept.push_back(id);
      }
      const double progress = static_cast<double>(processed) / std::max(1.0, total_work);
      const double lr = std::max(min_lr, config.initial_learning_rate * (1.0 - progress));
      processed += ids.size();
      const auto pairs = generate_training_pairs(kept, config.window,
                                                 config.dynamic_window ? &rng : nullptr);
      for (const auto& [center, context] : pairs) {
        std::size_t n = 0;
        for (std::size_t k = 0; k < config.negatives; ++k) {
          const int neg = noise.sample(rng);
          if (neg != context) negatives[n++] = neg;
        }
        loss_sum += sgns_train_step(center, context, std::span<const int>(negatives.data(), n),
                                    table, lr);
        ++pair_count;
      }
    }
    if (epoch_losses) {
      epoch_losses->push_back(pair_count ? loss_sum / static_cast<double>(pair_count) : 0.0);
    }
  }
  return table;
}

std::vector<Neighbor> nearest_words(const Matrix& vectors, std::span<const double> query,
                                    std::size_t k) {
  if (query.size() != vectors.cols()) {
    throw InvalidArgument("nearest_words: query dimension " + std::to_string(query.size()) +
                          " does not match table dimension " + std::to_string(vectors.cols()));
  }
  if (k > vectors.rows()) {
    throw InvalidArgument("nearest_words: k = " + std::to_string(k) + " exceeds vocabulary size " +
                          std::to_string(vectors.rows()));
  }
  const double qn = norm(query);
  if (qn == 0.0) throw InvalidArgument("nearest_words: zero-norm input");
  std::vector<Neighbor> all(vectors.rows());
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    const auto row = vectors.row(i);
    const double rn = norm(row);
    all[i].id = static_cast<int>(i);
    all[i].cosine = rn == 0.0 ? 0.0 : std::clamp(dot(row, query) / (rn * qn), -1.0, 1.0);
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.id < b.id;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

void write_word2vec_text(std::ostream& out, const EmbeddingTable& table) {
  out << table.size() << ' ' << table.dimension() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.words[i];
    for (double x : table.input.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

EmbeddingTable read_word2vec_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("word2vec: missing header line");
  std::size_t rows = 0, dims = 0;
  {
    std::istringstream header(line);
    if (!(header >> rows >> dims) || dims == 0) {
      throw FormatError("word2vec: header must be 'V d', got '" + line + "'");
    }
  }
  EmbeddingTable table;
  table.input = Matrix(rows, dims);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw FormatError("word2vec: expected " + std::to_string(rows) + " rows, got " +
                        std::to_string(i));
    }
    std::string_view rest = line;
    const std::size_t space = rest.find(' ');
    if (space == 0 || space == std::string_view::npos) {
      throw FormatError("word2vec row " + std::to_string(i + 1) + ": missing word");
    }
    table.words.emplace_back(rest.substr(0, space));
    rest.remove_prefix(space + 1);
    auto row = table.input.row(i);
    for (std::size_t j = 0; j < dims; ++j) {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
      if (ec != std::errc()) {
        throw FormatError("word2vec row " + std::to_string(i + 1) + ": expected " +
                          std::to_string(dims) + " reals");
      }
      row[j] = value;
      rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    }
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\r')) rest.remove_prefix(1);
    if (!rest.empty()) {
      throw FormatError("word2vec row " + std::to_string(i + 1) + ": more than " +
                        std::to_string(dims) + " values");
    }
  }
  return table;
}

}  // namespace abae
