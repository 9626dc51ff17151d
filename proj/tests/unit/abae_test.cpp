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

#include "abae/abae.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "abae/error.hpp"
#include "abae/kmeans.hpp"
#include "abae/synthetic.hpp"

namespace abae {
namespace {

// Two words in 2-D: e0 = (2, 0), e1 = (0, 1); M = I; K = 2.
AbaeModel two_word_model() {
  AbaeModel m;
  m.embeddings = Matrix(2, 2, std::vector<double>{2, 0, 0, 1});
  m.attention = Matrix::identity(2);
  m.classifier = Matrix(2, 2);
  m.bias = {0.0, 0.0};
  m.aspects = Matrix(2, 2, std::vector<double>{1, 0, 0, 1});
  return m;
}

AbaeModel random_model(std::size_t v, std::size_t d, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  AbaeModel m;
  m.embeddings = Matrix(v, d);
  for (double& x : m.embeddings.values()) x = uniform_real(rng, -1.0, 1.0);
  m.attention = Matrix(d, d);
  for (double& x : m.attention.values()) x = uniform_real(rng, -0.5, 0.5);
  m.classifier = Matrix(k, d);
  for (double& x : m.classifier.values()) x = uniform_real(rng, -1.0, 1.0);
  m.bias.resize(k);
  for (double& x : m.bias) x = uniform_real(rng, -0.5, 0.5);
  m.aspects = Matrix(k, d);
  for (double& x : m.aspects.values()) x = uniform_real(rng, -1.0, 1.0);
  return m;
}

TEST(Attention, WorkedExample) {
  const auto m = two_word_model();
  const std::vector<int> s = {0, 1};
  const auto a = attention_weights(s, m);
  // y = (2, 1); logits e_i^T y = (4, 1).
  const double expected = std::exp(4.0) / (std::exp(4.0) + std::exp(1.0));
  EXPECT_NEAR(a[0], expected, 1e-15);
  EXPECT_NEAR(a[0], 0.9526, 1e-4);
  const auto z = sentence_embedding(s, m);
  EXPECT_NEAR(z[0], 2.0 * expected, 1e-15);
  EXPECT_NEAR(z[1], 1.0 - expected, 1e-15);
}

TEST(Attention, DegenerateCases) {
  auto m = two_word_model();
  EXPECT_EQ(attention_weights(std::vector<int>{1}, m), (Vector{1.0}));
  EXPECT_EQ(sentence_embedding(std::vector<int>{0}, m), (Vector{2.0, 0.0}));
  const auto same = sentence_embedding(std::vector<int>{1, 1}, m);
  EXPECT_NEAR(same[1], 1.0, 1e-15);
  m.attention.fill(0.0);
  const auto a = attention_weights(std::vector<int>{0, 1, 1}, m);
  for (double x : a) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(attention_weights(std::vector<int>{}, m), InvalidArgument);
  EXPECT_THROW(attention_weights(std::vector<int>{2}, m), InvalidArgument);
}

TEST(AspectProbabilities, Cases) {
  auto m = two_word_model();
  const std::vector<double> z = {0.3, -0.7};
  const auto uniform = aspect_probabilities(z, m);
  EXPECT_DOUBLE_EQ(uniform[0], 0.5);
  m.bias = {1.0, 0.0};
  const auto p = aspect_probabilities(z, m);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(p[0], 0.7311, 1e-4);
  m.bias = {10.0, -10.0};
  EXPECT_GT(aspect_probabilities(z, m)[0], 1.0 - 1e-8);
}

TEST(Reconstruct, ConvexCombinationOfRows) {
  auto m = two_word_model();
  m.aspects = Matrix(2, 2, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(reconstruct(std::vector<double>{1, 0}, m), (Vector{1, 2}));
  const auto r = reconstruct(std::vector<double>{0.25, 0.75}, m);
  EXPECT_NEAR(r[0], 0.25 * 1 + 0.75 * 3, 1e-15);
  EXPECT_NEAR(r[1], 0.25 * 2 + 0.75 * 4, 1e-15);
}

TEST(HingeLoss, DefinitionCases) {
  // Single-word sentences: z_s = e_w, and with W = 0 the reconstruction is
  // the mean of the rows of T.
  AbaeModel m;
  m.embeddings = Matrix(3, 2, std::vector<double>{1, 1, 1, -1, 1, 0});
  m.attention = Matrix::identity(2);
  m.classifier = Matrix(2, 2);
  m.bias = {0.0, 0.0};
  m.aspects = Matrix(2, 2, std::vector<double>{1, 1, 1, 1});  // r = (1, 1)
  const std::vector<int> s = {0};                               // z = (1, 1) = r
  const std::vector<int> orth = {1};                            // (1, -1) is orthogonal to r
  const TokenIds negatives[] = {orth};
  EXPECT_NEAR(hinge_loss(s, negatives, m), 0.0, 1e-15);
  // Sentence orthogonal to r: loss = margin per negative.
  const TokenIds two[] = {orth, orth};
  EXPECT_NEAR(hinge_loss(orth, two, m), 2.0, 1e-15);
  // cos(r, z) = 1, cos(r, n) = cos((1,1),(1,0)).
  const std::vector<int> diag = {2};
  const TokenIds other[] = {diag};
  EXPECT_NEAR(hinge_loss(s, other, m), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(hinge_loss(s, {}, m), InvalidArgument);
}

TEST(Orthogonality, PenaltyValues) {
  EXPECT_NEAR(orthogonality_penalty(Matrix(2, 2, std::vector<double>{3, 0, 0, -2})), 0.0, 1e-15);
  EXPECT_NEAR(orthogonality_penalty(Matrix(2, 2, std::vector<double>{1, 0, 1, 0})),
              std::sqrt(2.0), 1e-15);
  double previous = std::sqrt(2.0) + 1e-9;
  for (double angle : {0.0, 0.3, 0.8, 1.2, std::numbers::pi / 2}) {
    const double p = orthogonality_penalty(
        Matrix(2, 2, std::vector<double>{1, 0, std::cos(angle), std::sin(angle)}));
    EXPECT_LT(p, previous);
    previous = p;
  }
  EXPECT_THROW(orthogonality_penalty(Matrix(2, 2, std::vector<double>{0, 0, 1, 0})),
               InvalidArgument);
}

TEST(Orthogonality, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Matrix t = random_model(1, 4, 5, seed).aspects;
    const Matrix g = orthogonality_penalty_gradient(t);
    std::vector<double> params(t.values().begin(), t.values().end());
    auto loss = [&] { return orthogonality_penalty(Matrix(5, 4, params)); };
    const auto report = finite_difference_check(loss, params, g.values());
    EXPECT_LT(report.max_relative_error, 1e-6) << "seed " << seed;
  }
  const Matrix zero_grad = orthogonality_penalty_gradient(Matrix::identity(3));
  for (double x : zero_grad.values()) EXPECT_EQ(x, 0.0);
}

struct Batch {
  std::vector<std::vector<int>> sentences;
  std::vector<TrainingExample> examples;
};

Batch random_batch(std::size_t v, std::size_t size, std::size_t negatives, std::uint64_t seed) {
  Rng rng(seed);
  Batch b;
  for (std::size_t i = 0; i < size * (negatives + 1); ++i) {
    std::vector<int> s(1 + uniform_index(rng, 5));
    for (int& w : s) w = static_cast<int>(uniform_index(rng, v));
    b.sentences.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < size; ++i) {
    TrainingExample ex{b.sentences[i], {}};
    for (std::size_t n = 0; n < negatives; ++n) ex.negatives.emplace_back(b.sentences[size + i * negatives + n]);
    b.examples.push_back(std::move(ex));
  }
  return b;
}

void check_gradient(Matrix& target, const Matrix& analytic, const std::function<double()>& loss,
                    const char* name) {
  const auto report = finite_difference_check(loss, target.values(), analytic.values());
  EXPECT_LT(report.max_relative_error, 1e-6) << name << " worst index " << report.worst_index;
}

TEST(Backward, AllParametersMatchFiniteDifferences) {
  AbaeConfig config;
  config.aspects = 3;
  config.negatives = 4;
  for (std::uint64_t seed : {11u, 12u}) {
    AbaeModel m = random_model(12, 4, 3, seed);
    const auto batch = random_batch(12, 3, config.negatives, seed + 100);
    const auto g = abae_backward(batch.examples, m, config);
    auto loss = [&] { return abae_objective(batch.examples, m, config); };
    EXPECT_NEAR(g.objective, loss(), 1e-12);
    check_gradient(m.attention, g.attention, loss, "M");
    check_gradient(m.classifier, g.classifier, loss, "W");
    check_gradient(m.aspects, g.aspects, loss, "T");
    const auto report = finite_difference_check(loss, m.bias, g.bias);
    EXPECT_LT(report.max_relative_error, 1e-6) << "b";
  }
}

TEST(Config, DefaultsAndValidation) {
  AbaeConfig c;
  EXPECT_EQ(c.aspects, 30u);
  EXPECT_EQ(c.batch_size, 50u);
  EXPECT_EQ(c.negatives, 20u);
  EXPECT_DOUBLE_EQ(c.ortho_weight, 0.1);
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.001);
  c.aspects = 1;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

EmbeddingTable table_of(const Matrix& vectors) {
  EmbeddingTable t;
  for (std::size_t i = 0; i < vectors.rows(); ++i) t.words.push_back("w" + std::to_string(i));
  t.input = vectors;
  return t;
}

TEST(Initialize, ShapesAndNearIdentityAttention) {
  const auto base = random_model(10, 4, 3, 5);
  const auto table = table_of(base.embeddings);
  AbaeConfig config;
  config.aspects = 3;
  const auto m = initialize_abae(table, base.aspects, config);
  EXPECT_EQ(m.aspects, base.aspects);
  EXPECT_EQ(m.embeddings, base.embeddings);
  EXPECT_EQ(m.vocabulary_hash, table.vocabulary_hash());
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_LE(std::abs(m.attention(r, c) - (r == c ? 1.0 : 0.0)), 0.01);
    }
  }
  for (double w : m.classifier.values()) EXPECT_LE(std::abs(w), 0.05);
  config.aspects = 4;
  EXPECT_THROW(initialize_abae(table, base.aspects, config), InvalidArgument);
}

TEST(Checkpoint, RoundTripAndHashCheck) {
  const auto base = random_model(10, 4, 3, 6);
  const auto table = table_of(base.embeddings);
  AbaeConfig config;
  config.aspects = 3;
  const auto m = initialize_abae(table, base.aspects, config);
  std::stringstream first;
  save_checkpoint(first, m);
  const auto loaded = load_checkpoint(first, table);
  std::stringstream second;
  save_checkpoint(second, loaded);
  const auto again = load_checkpoint(second, table);
  EXPECT_EQ(again.attention, loaded.attention);
  EXPECT_EQ(again.classifier, loaded.classifier);
  EXPECT_EQ(again.bias, loaded.bias);
  EXPECT_EQ(again.aspects, loaded.aspects);
  EXPECT_EQ(second.str(), first.str());
  for (std::size_t i = 0; i < m.aspects.size(); ++i) {
    EXPECT_EQ(loaded.aspects.values()[i], static_cast<double>(static_cast<float>(m.aspects.values()[i])));
  }

  auto renamed = table;
  renamed.words[0] = "other";
  std::stringstream third(first.str());
  try {
    load_checkpoint(third, renamed);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("vocabulary hash mismatch"), std::string::npos);
  }
  std::stringstream truncated(first.str().substr(0, 40));
  EXPECT_THROW(load_checkpoint(truncated, table), FormatError);
}

TEST(Training, FrozenEmbeddingsAndDiverseAspects) {
  synthetic::CorpusOptions options;
  options.listings = 10;
  options.min_reviews = 30;
  options.max_reviews = 30;
  options.seed = 4;
  const auto planted = synthetic::generate_corpus(options);
  const auto pre = preprocess(planted.reviews);
  SgnsConfig sgns;
  sgns.dimension = 20;
  sgns.seed = 4;
  auto table = train_embeddings(pre.corpus, pre.vocabulary, sgns);
  for (std::size_t r = 0; r < table.input.rows(); ++r) {
    auto row = table.input.row(r);
    scale(1.0 / norm(row), row);
  }
  KMeansOptions km;
  km.clusters = 5;
  const auto kmeans = kmeans_fit(table.input, km);

  AbaeConfig config;
  config.aspects = 5;
  config.epochs = 3;
  const Matrix before = table.input;
  std::vector<double> history;
  const auto model = train_abae(pre.corpus, table, kmeans, config, &history);
  EXPECT_EQ(table.input, before);
  EXPECT_EQ(model.embeddings, before);
  ASSERT_EQ(history.size(), 3u);
  EXPECT_LT(history.back(), history.front());

  Matrix duplicated = kmeans.centroids;
  for (std::size_t k = 1; k < duplicated.rows(); ++k) {
    std::copy(duplicated.row(0).begin(), duplicated.row(0).end(), duplicated.row(k).begin());
  }
  EXPECT_LT(orthogonality_penalty(model.aspects), orthogonality_penalty(duplicated));

  const auto again = train_abae(pre.corpus, table, kmeans, config);
  EXPECT_EQ(again.aspects, model.aspects);
  EXPECT_EQ(again.attention, model.attention);

  const auto inference = infer_sentence(pre.corpus[0].token_ids, model);
  EXPECT_TRUE(is_simplex(inference.aspects.values()));
  EXPECT_EQ(inference.embedding.size(), 20u);
  EXPECT_THROW(infer_sentence(std::vector<int>{}, model), InvalidArgument);
}

}  // namespace
}  // namespace abae
