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

#pragma once

// Generators for fixtures with a known ground truth: review corpora whose
// sentences each draw from one of several disjoint topic vocabularies, and
// guest populations spread between two aspect archetypes.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "abae/corpus.hpp"
#include "abae/profiles.hpp"

namespace abae::synthetic {

struct Topic {
  std::string name;
  std::vector<std::string> words;
};

// location, cleanliness, communication, amenities, value; no word is shared
// between topics or with the background list, and none is a stopword.
const std::vector<Topic>& planted_topics();
// Generic review words mixed into every topic.
const std::vector<std::string>& background_words();

struct CorpusOptions {
  std::size_t topics = 5;  // at most planted_topics().size()
  std::size_t listings = 20;
  std::size_t min_reviews = 20;  // per listing
  std::size_t max_reviews = 80;
  std::size_t guests = 200;
  std::size_t min_sentences = 1;  // per review
  std::size_t max_sentences = 4;
  std::size_t min_topic_words = 3;  // per sentence
  std::size_t max_topic_words = 6;
  // Chance of adding a background word / stopword after each topic word.
  double background_rate = 0.15;
  double stopword_rate = 0.5;
  // Weight of the guest's own topic preference against the listing's when a
  // sentence topic is drawn.
  double guest_weight = 0.5;
  std::uint64_t seed = 1;
};

struct PlantedCorpus {
  std::vector<RawReview> reviews;
  std::vector<std::string> topic_names;
  // Planted topic of each sentence, per review in sentence order.
  std::map<std::string, std::vector<std::size_t>> sentence_topics;
  std::map<std::string, std::size_t> topic_of_word;

  std::size_t topic_of(const std::string& review_id, std::size_t position) const;
  std::size_t sentence_count() const;
};

PlantedCorpus generate_corpus(const CorpusOptions& options);

// Cluster purity: every cluster is mapped to the majority truth label of its
// members, and the result is the share of members matching their cluster's
// label.
double cluster_purity(std::span<const std::size_t> clusters, std::span<const std::size_t> truth);

// Majority planted topic among the listed words; words outside every topic
// are ignored. Ties go to the lowest topic id. Throws when no word is planted.
std::size_t majority_topic(std::span<const std::string> words,
                           const std::map<std::string, std::size_t>& topic_of_word);

struct PopulationOptions {
  std::size_t aspects = 5;  // aspect 0 is location, aspect 1 cleanliness
  std::size_t guests = 20;
  std::size_t guest_sentences = 40;
  std::size_t listings = 69;
  std::size_t min_reviews = 4;
  std::size_t max_reviews = 10;
  std::size_t min_sentences = 2;
  std::size_t max_sentences = 6;
  // Share of sentences about the two archetype aspects.
  double archetype_share = 0.8;
  // Logit of the dominant aspect and the Gaussian noise on every logit.
  double dominance = 1.0;
  double noise = 1.0;
  std::uint64_t seed = 1;
};

struct Population {
  std::vector<GuestProfile> profiles;  // BoS over each guest's sentences
  std::vector<double> guest_axis;      // 0 = location lover, 1 = cleanliness lover
  std::vector<ListingItem> listings;
};

// Guests sit uniformly along the location-cleanliness axis; their sentences
// (and those of each listing's reviews) are dominated by one aspect drawn
// according to that position.
Population generate_population(const PopulationOptions& options);

}  // namespace abae::synthetic
