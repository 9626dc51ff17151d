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

#include "abae/synthetic.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "abae/corpus.hpp"
#include "abae/error.hpp"

namespace abae::synthetic {
namespace {

TEST(PlantedTopics, DisjointAndNotStopwords) {
  std::set<std::string> seen;
  for (const auto& topic : planted_topics()) {
    for (const auto& w : topic.words) {
      EXPECT_TRUE(seen.insert(w).second) << w;
      EXPECT_FALSE(default_stopwords().contains(w)) << w;
    }
  }
  for (const auto& w : background_words()) {
    EXPECT_TRUE(seen.insert(w).second) << w;
    EXPECT_FALSE(default_stopwords().contains(w)) << w;
  }
}

TEST(GenerateCorpus, ShapeAndTruth) {
  CorpusOptions options;
  options.listings = 4;
  options.min_reviews = 5;
  options.max_reviews = 5;
  options.guests = 7;
  options.seed = 3;
  const auto corpus = generate_corpus(options);
  EXPECT_EQ(corpus.reviews.size(), 20u);
  EXPECT_EQ(corpus.topic_names.size(), 5u);
  std::size_t sentences = 0;
  for (const auto& review : corpus.reviews) {
    const auto segmented = segment_sentences(review.text);
    ASSERT_EQ(segmented.size(), corpus.sentence_topics.at(review.review_id).size()) << review.text;
    sentences += segmented.size();
    for (std::size_t i = 0; i < segmented.size(); ++i) {
      const auto topic = corpus.topic_of(review.review_id, i);
      for (const auto& token : tokenize_and_filter(segmented[i], default_stopwords())) {
        const auto it = corpus.topic_of_word.find(token);
        if (it != corpus.topic_of_word.end()) {
          EXPECT_EQ(it->second, topic) << token;
        }
      }
    }
  }
  EXPECT_EQ(corpus.sentence_count(), sentences);

  std::stringstream first, second;
  write_reviews(first, corpus.reviews);
  write_reviews(second, generate_corpus(options).reviews);
  EXPECT_EQ(first.str(), second.str());
}

TEST(Purity, Definition) {
  const std::vector<std::size_t> clusters = {0, 0, 0, 1, 1, 2};
  const std::vector<std::size_t> truth = {5, 5, 6, 7, 7, 7};
  EXPECT_DOUBLE_EQ(cluster_purity(clusters, truth), 5.0 / 6.0);
  const std::vector<std::size_t> short_truth = {1};
  EXPECT_THROW(cluster_purity(clusters, short_truth), InvalidArgument);
}

TEST(MajorityTopic, TiesAndUnknownWords) {
  const std::map<std::string, std::size_t> topics = {{"a", 1}, {"b", 0}, {"c", 1}};
  const std::vector<std::string> words = {"a", "zzz", "b", "c"};
  EXPECT_EQ(majority_topic(words, topics), 1u);
  const std::vector<std::string> tie = {"a", "b"};
  EXPECT_EQ(majority_topic(tie, topics), 0u);
  const std::vector<std::string> none = {"zzz"};
  EXPECT_THROW(majority_topic(none, topics), InvalidArgument);
}

TEST(GeneratePopulation, ProfilesAreSimplexes) {
  PopulationOptions options;
  options.listings = 5;
  const auto population = generate_population(options);
  ASSERT_EQ(population.profiles.size(), 20u);
  ASSERT_EQ(population.guest_axis.size(), 20u);
  EXPECT_EQ(population.listings.size(), 5u);
  for (const auto& p : population.profiles) {
    EXPECT_TRUE(is_simplex(p.distribution.values()));
    EXPECT_EQ(p.sentence_count, options.guest_sentences);
  }
  for (const auto& l : population.listings) {
    EXPECT_GE(l.reviews.size(), options.min_reviews);
    EXPECT_LE(l.reviews.size(), options.max_reviews);
  }
  // Guests near the cleanliness end weight aspect 1 above aspect 0.
  for (std::size_t g = 0; g < 20; ++g) {
    const auto& p = population.profiles[g].distribution;
    if (population.guest_axis[g] > 0.9) {
      EXPECT_GT(p[1], p[0]);
    }
    if (population.guest_axis[g] < 0.1) {
      EXPECT_LT(p[1], p[0]);
    }
  }
}

}  // namespace
}  // namespace abae::synthetic
