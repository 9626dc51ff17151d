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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "abae/error.hpp"
#include "abae/synthetic.hpp"

namespace abae {
namespace {

TEST(TrainingPairs, FixedWindow) {
  const std::vector<int> abc = {0, 1, 2};
  const auto pairs = generate_training_pairs(abc, 1);
  EXPECT_EQ(pairs, (std::vector<TrainingPair>{{0, 1}, {1, 0}, {1, 2}, {2, 1}}));
  EXPECT_TRUE(generate_training_pairs(std::vector<int>{7}, 5).empty());
  EXPECT_EQ(generate_training_pairs(std::vector<int>{0, 1, 2, 3}, 2).size(), 10u);
}

TEST(TrainingPairs, DynamicWindowIsASubset) {
  const std::vector<int> s = {0, 1, 2, 3, 4, 5, 6, 7};
  Rng rng(3);
  const auto full = generate_training_pairs(s, 3);
  const std::multiset<TrainingPair> all(full.begin(), full.end());
  for (int trial = 0; trial < 20; ++trial) {
    const auto pairs = generate_training_pairs(s, 3, &rng);
    EXPECT_LE(pairs.size(), full.size());
    EXPECT_GE(pairs.size(), 14u);  // window 1 for every center
    for (const auto& p : pairs) EXPECT_TRUE(all.contains(p));
  }
}

TEST(NegativeSampling, UnigramPower) {
  const std::vector<std::int64_t> even = {1, 1};
  EXPECT_EQ(negative_sampling_distribution(even), (std::vector<double>{0.5, 0.5}));
  const std::vector<std::int64_t> skew = {4, 1};
  const auto p = negative_sampling_distribution(skew);
  const double a = std::pow(4.0, 0.75);
  EXPECT_NEAR(p[0], a / (a + 1.0), 1e-15);
  EXPECT_NEAR(p[0], 0.7388, 1e-4);
  const auto flat = negative_sampling_distribution(skew, 0.0);
  EXPECT_DOUBLE_EQ(flat[0], 0.5);
  EXPECT_THROW(negative_sampling_distribution(std::vector<std::int64_t>{}), InvalidArgument);
}

TEST(AliasSampler, MatchesDistribution) {
  const std::vector<double> p = {0.5, 0.3, 0.15, 0.05};
  AliasSampler sampler(p);
  Rng rng(11);
  std::vector<int> hits(4, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++hits[sampler.sample(rng)];
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(hits[k] / static_cast<double>(n), p[k], 0.005);
}

EmbeddingTable tiny_table(std::uint64_t seed) {
  EmbeddingTable t;
  t.words = {"a", "b", "c", "d"};
  t.input = Matrix(4, 3);
  t.output = Matrix(4, 3);
  Rng rng(seed);
  for (double& x : t.input.values()) x = uniform_real(rng, -0.5, 0.5);
  for (double& x : t.output.values()) x = uniform_real(rng, -0.5, 0.5);
  return t;
}

TEST(Sgns, LossAtZeroScore) {
  EmbeddingTable t = tiny_table(1);
  t.output.fill(0.0);
  EXPECT_NEAR(sgns_loss(0, 1, {}, t), std::log(2.0), 1e-15);
}

TEST(Sgns, SaturatedLossNearZero) {
  EmbeddingTable t = tiny_table(1);
  t.input.fill(0.0);
  t.output.fill(0.0);
  t.input(0, 0) = 10.0;
  t.output(1, 0) = 10.0;
  t.output(2, 0) = -10.0;
  const int negatives[] = {2};
  EXPECT_LT(sgns_loss(0, 1, negatives, t), 1e-10);
}

TEST(Sgns, StepMatchesFiniteDifferences) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    EmbeddingTable t = tiny_table(seed);
    const int negatives[] = {2, 3, 2};
    const double lr = 1e-3;
    EmbeddingTable stepped = t;
    sgns_train_step(0, 1, negatives, stepped, lr);
    // The step is -lr * gradient; recover the analytic gradient from it.
    std::vector<double> params, analytic;
    for (std::size_t i = 0; i < t.input.size(); ++i) {
      params.push_back(t.input.values()[i]);
      analytic.push_back((t.input.values()[i] - stepped.input.values()[i]) / lr);
    }
    for (std::size_t i = 0; i < t.output.size(); ++i) {
      params.push_back(t.output.values()[i]);
      analytic.push_back((t.output.values()[i] - stepped.output.values()[i]) / lr);
    }
    auto loss = [&] {
      EmbeddingTable probe = t;
      std::copy(params.begin(), params.begin() + t.input.size(), probe.input.values().begin());
      std::copy(params.begin() + t.input.size(), params.end(), probe.output.values().begin());
      return sgns_loss(0, 1, negatives, probe);
    };
    const auto report = finite_difference_check(loss, params, analytic);
    EXPECT_LT(report.max_relative_error, 1e-4) << "seed " << seed;
  }
}

TEST(NearestWords, SelfFirstAndPermutation) {
  const EmbeddingTable t = tiny_table(4);
  const auto nb = nearest_words(t.input, t.input.row(2), 1);
  ASSERT_EQ(nb.size(), 1u);
  EXPECT_EQ(nb[0].id, 2);
  EXPECT_NEAR(nb[0].cosine, 1.0, 1e-12);
  const auto all = nearest_words(t.input, t.input.row(0), 4);
  std::set<int> ids;
  for (std::size_t i = 0; i < all.size(); ++i) {
    ids.insert(all[i].id);
    if (i > 0) {
      EXPECT_GE(all[i - 1].cosine, all[i].cosine);
    }
  }
  EXPECT_EQ(ids.size(), 4u);
  EXPECT_THROW(nearest_words(t.input, std::vector<double>{0, 0, 0}, 1), InvalidArgument);
  EXPECT_THROW(nearest_words(t.input, t.input.row(0), 5), InvalidArgument);
}

TEST(Word2VecText, ExactRoundTrip) {
  EmbeddingTable t = tiny_table(5);
  t.input(1, 2) = 1.0 / 3.0;
  t.input(3, 0) = -1e-300;
  std::stringstream ss;
  write_word2vec_text(ss, t);
  const auto back = read_word2vec_text(ss);
  EXPECT_EQ(back.words, t.words);
  EXPECT_EQ(back.input, t.input);
  std::stringstream again;
  write_word2vec_text(again, back);
  EXPECT_EQ(again.str(), ss.str());

  std::stringstream bad("2 3\na 1 2 3\nb 1 2\n");
  EXPECT_THROW(read_word2vec_text(bad), FormatError);
}

TEST(SgnsConfig, DefaultsAndValidation) {
  SgnsConfig c;
  EXPECT_EQ(c.dimension, 200u);
  EXPECT_EQ(c.window, 5u);
  EXPECT_EQ(c.negatives, 5u);
  EXPECT_NO_THROW(c.validate());
  c.window = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

class PlantedEmbeddings : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    synthetic::CorpusOptions options;
    options.listings = 10;
    options.min_reviews = 40;
    options.max_reviews = 40;
    options.seed = 3;
    planted_ = new synthetic::PlantedCorpus(synthetic::generate_corpus(options));
    result_ = new PreprocessResult(preprocess(planted_->reviews));
    SgnsConfig config;
    config.dimension = 30;
    config.epochs = 5;
    config.seed = 2;
    table_ = new EmbeddingTable(train_embeddings(result_->corpus, result_->vocabulary, config, &losses_));
  }
  static void TearDownTestSuite() {
    delete table_;
    delete result_;
    delete planted_;
  }
  static inline synthetic::PlantedCorpus* planted_ = nullptr;
  static inline PreprocessResult* result_ = nullptr;
  static inline EmbeddingTable* table_ = nullptr;
  static inline std::vector<double> losses_;
};

TEST_F(PlantedEmbeddings, LossDecreasesEarly) {
  ASSERT_EQ(losses_.size(), 5u);
  EXPECT_LE(losses_[1], losses_[0]);
}

TEST_F(PlantedEmbeddings, IntraTopicCosineExceedsInterTopic) {
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (const auto& [a, ta] : planted_->topic_of_word) {
    for (const auto& [b, tb] : planted_->topic_of_word) {
      if (a >= b) continue;
      const auto ia = table_->id_of(a), ib = table_->id_of(b);
      if (!ia || !ib) continue;
      const double c = cosine_similarity(table_->input.row(*ia), table_->input.row(*ib));
      if (ta == tb) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  ASSERT_GT(n_intra, 0u);
  EXPECT_GT(intra / n_intra, inter / n_inter);
}

TEST_F(PlantedEmbeddings, NeighborsShareTopic) {
  const auto& topic_of = planted_->topic_of_word;
  std::size_t checked = 0, same = 0;
  for (const auto& [word, topic] : topic_of) {
    const auto id = table_->id_of(word);
    if (!id) continue;
    for (const auto& nb : nearest_words(table_->input, table_->input.row(*id), 6)) {
      if (nb.id == *id) continue;
      ++checked;
      const auto it = topic_of.find(table_->words[nb.id]);
      if (it != topic_of.end() && it->second == topic) ++same;
    }
  }
  EXPECT_GT(static_cast<double>(same) / checked, 0.9);
}

TEST_F(PlantedEmbeddings, Reproducible) {
  SgnsConfig config;
  config.dimension = 30;
  config.epochs = 5;
  config.seed = 2;
  const auto again = train_embeddings(result_->corpus, result_->vocabulary, config);
  EXPECT_EQ(again.input, table_->input);
  EXPECT_EQ(again.output, table_->output);
}

}  // namespace
}  // namespace abae
