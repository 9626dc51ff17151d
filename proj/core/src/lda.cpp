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

#include "abae/lda.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "abae/error.hpp"

namespace abae {

namespace {

std::size_t sample_from(std::span<const double> weights, double total, Rng& rng) {
  double target = uniform_real(rng, 0.0, total);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (target < weights[k]) return k;
    target -= weights[k];
  }
  return weights.size() - 1;
}

std::string format_real(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

double LdaModel::phi(std::size_t topic, std::size_t word) const {
  return (static_cast<double>(count(topic, word)) + beta) /
         (static_cast<double>(topic_totals[topic]) + static_cast<double>(vocabulary_size) * beta);
}

Vector lda_topic_conditional(std::span<const std::int64_t> doc_topic,
                             std::span<const std::int64_t> word_topic,
                             std::span<const std::int64_t> topic_totals, double alpha,
                             double beta, std::size_t vocabulary_size) {
  const std::size_t k = doc_topic.size();
  if (k == 0 || word_topic.size() != k || topic_totals.size() != k) {
    throw InvalidArgument("lda_topic_conditional: count vectors must share a non-zero length");
  }
  const double vb = static_cast<double>(vocabulary_size) * beta;
  Vector p(k);
  double total = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    p[t] = (static_cast<double>(doc_topic[t]) + alpha) *
           (static_cast<double>(word_topic[t]) + beta) /
           (static_cast<double>(topic_totals[t]) + vb);
    total += p[t];
  }
  for (double& x : p) x /= total;
  return p;
}

LdaSampler::LdaSampler(std::vector<std::vector<int>> documents, std::size_t vocabulary_size,
                       const LdaOptions& options)
    : rng_(options.seed) {
  if (options.topics < 1) throw InvalidArgument("lda: K must be >= 1");
  if (vocabulary_size < 1) throw InvalidArgument("lda: empty vocabulary");
  for (auto& doc : documents) {
    for (int w : doc) {
      if (w < 0 || static_cast<std::size_t>(w) >= vocabulary_size) {
        throw InvalidArgument("lda: word id " + std::to_string(w) + " outside vocabulary");
      }
    }
    if (!doc.empty()) docs_.push_back(std::move(doc));
  }
  if (docs_.empty()) throw InvalidArgument("lda: all documents are empty");

  const std::size_t k = options.topics;
  model_.topics = k;
  model_.vocabulary_size = vocabulary_size;
  model_.alpha = options.alpha > 0.0 ? options.alpha : 1.0 / static_cast<double>(k);
  model_.beta = options.beta > 0.0 ? options.beta : 1.0 / static_cast<double>(k);
  model_.topic_word.assign(k * vocabulary_size, 0);
  model_.topic_totals.assign(k, 0);
  doc_topic_.assign(docs_.size() * k, 0);
  weights_.resize(k);

  assignments_.resize(docs_.size());
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    assignments_[d].resize(docs_[d].size());
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto z = uniform_index(rng_, k);
      assignments_[d][i] = static_cast<int>(z);
      ++doc_topic_[d * k + z];
      ++model_.topic_word[z * vocabulary_size + static_cast<std::size_t>(docs_[d][i])];
      ++model_.topic_totals[z];
    }
  }
}

void LdaSampler::sweep() {
  const std::size_t k = model_.topics;
  const std::size_t v = model_.vocabulary_size;
  const double vb = static_cast<double>(v) * model_.beta;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    std::int64_t* dt = doc_topic_.data() + d * k;
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto w = static_cast<std::size_t>(docs_[d][i]);
      const auto old = static_cast<std::size_t>(assignments_[d][i]);
      --dt[old];
      --model_.topic_word[old * v + w];
      --model_.topic_totals[old];

      double total = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        weights_[t] = (static_cast<double>(dt[t]) + model_.alpha) *
                      (static_cast<double>(model_.topic_word[t * v + w]) + model_.beta) /
                      (static_cast<double>(model_.topic_totals[t]) + vb);
        total += weights_[t];
      }
      const std::size_t z = sample_from(weights_, total, rng_);
      assignments_[d][i] = static_cast<int>(z);
      ++dt[z];
      ++model_.topic_word[z * v + w];
      ++model_.topic_totals[z];
    }
  }
}

bool LdaSampler::counts_consistent() const {
  const std::size_t k = model_.topics;
  const std::size_t v = model_.vocabulary_size;
  std::vector<std::int64_t> tw(k * v, 0), tt(k, 0), dt(docs_.size() * k, 0);
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto z = static_cast<std::size_t>(assignments_[d][i]);
      ++tw[z * v + static_cast<std::size_t>(docs_[d][i])];
      ++tt[z];
      ++dt[d * k + z];
    }
  }
  return tw == model_.topic_word && tt == model_.topic_totals && dt == doc_topic_;
}

LdaModel lda_fit(std::span<const std::vector<int>> documents, std::size_t vocabulary_size,
                 const LdaOptions& options) {
  LdaSampler sampler(std::vector<std::vector<int>>(documents.begin(), documents.end()),
                     vocabulary_size, options);
  for (std::size_t it = 0; it < options.iterations; ++it) sampler.sweep();
  return sampler.model();
}

AspectDistribution lda_infer(TokenIds sentence, const LdaModel& model, std::size_t iterations,
                             std::uint64_t seed) {
  std::vector<std::size_t> words;
  for (int w : sentence) {
    if (w >= 0 && static_cast<std::size_t>(w) < model.vocabulary_size) {
      words.push_back(static_cast<std::size_t>(w));
    }
  }
  if (words.empty()) throw InvalidArgument("lda_infer: no observed tokens");
  const std::size_t k = model.topics;
  iterations = std::max<std::size_t>(iterations, 2);

  Rng rng(seed);
  std::vector<std::int64_t> doc_topic(k, 0);
  std::vector<std::size_t> z(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    z[i] = uniform_index(rng, k);
    ++doc_topic[z[i]];
  }
  // The phi term is fixed during held-out sampling.
  std::vector<double> phi(words.size() * k);
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t t = 0; t < k; ++t) phi[i * k + t] = model.phi(t, words[i]);
  }

  Vector accumulated(k, 0.0);
  Vector weights(k);
  const std::size_t burn_in = iterations / 2;
  std::size_t samples = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --doc_topic[z[i]];
      double total = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        weights[t] = (static_cast<double>(doc_topic[t]) + model.alpha) * phi[i * k + t];
        total += weights[t];
      }
      z[i] = sample_from(weights, total, rng);
      ++doc_topic[z[i]];
    }
    if (it >= burn_in) {
      for (std::size_t t = 0; t < k; ++t) accumulated[t] += static_cast<double>(doc_topic[t]);
      ++samples;
    }
  }
  const double denom = static_cast<double>(words.size()) + static_cast<double>(k) * model.alpha;
  Vector theta(k);
  double total = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    theta[t] = (accumulated[t] / static_cast<double>(samples) + model.alpha) / denom;
    total += theta[t];
  }
  for (double& x : theta) x /= total;
  return AspectDistribution(std::move(theta));
}

std::vector<int> lda_top_words(const LdaModel& model, std::size_t topic, std::size_t n) {
  if (topic >= model.topics) throw InvalidArgument("lda_top_words: topic out of range");
  if (n > model.vocabulary_size) {
    throw InvalidArgument("lda_top_words: n = " + std::to_string(n) + " exceeds vocabulary size " +
                          std::to_string(model.vocabulary_size));
  }
  std::vector<int> ids(model.vocabulary_size);
  std::iota(ids.begin(), ids.end(), 0);
  // phi is monotone in n_kw within a topic, so compare raw counts.
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](int a, int b) {
                      const auto ca = model.count(topic, static_cast<std::size_t>(a));
                      const auto cb = model.count(topic, static_cast<std::size_t>(b));
                      if (ca != cb) return ca > cb;
                      return a < b;
                    });
  ids.resize(n);
  return ids;
}

void write_lda(std::ostream& out, const LdaModel& model) {
  out << "lda v1 " << model.topics << ' ' << model.vocabulary_size << ' '
      << format_real(model.alpha) << ' ' << format_real(model.beta) << '\n';
  for (std::size_t t = 0; t < model.topics; ++t) {
    for (std::size_t w = 0; w < model.vocabulary_size; ++w) {
      if (w) out << ' ';
      out << model.count(t, w);
    }
    out << '\n';
  }
}

LdaModel read_lda(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("lda: missing header");
  std::istringstream header(line);
  std::string magic, version, alpha_text, beta_text;
  LdaModel model;
  if (!(header >> magic >> version >> model.topics >> model.vocabulary_size >> alpha_text >>
        beta_text) ||
      magic != "lda" || version != "v1" || model.topics == 0 || model.vocabulary_size == 0) {
    throw FormatError("lda: header must be 'lda v1 K V alpha beta'");
  }
  auto parse_real = [](const std::string& s) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size() || !(x > 0.0)) {
      throw FormatError("lda: invalid hyperparameter '" + s + "'");
    }
    return x;
  };
  model.alpha = parse_real(alpha_text);
  model.beta = parse_real(beta_text);
  model.topic_word.assign(model.topics * model.vocabulary_size, 0);
  model.topic_totals.assign(model.topics, 0);
  for (std::size_t t = 0; t < model.topics; ++t) {
    if (!std::getline(in, line)) throw FormatError("lda: missing topic " + std::to_string(t));
    std::istringstream row(line);
    for (std::size_t w = 0; w < model.vocabulary_size; ++w) {
      std::int64_t c = 0;
      if (!(row >> c) || c < 0) {
        throw FormatError("lda: topic " + std::to_string(t) + " needs " +
                          std::to_string(model.vocabulary_size) + " non-negative counts");
      }
      model.topic_word[t * model.vocabulary_size + w] = c;
      model.topic_totals[t] += c;
    }
  }
  return model;
}

}  // namespace abae
