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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "abae/error.hpp"
#include "abae/numerics.hpp"

namespace abae::synthetic {

namespace {

const std::vector<std::string> kFillerStopwords = {"the", "was", "and", "very", "we",
                                                   "it",  "is",  "with", "a",   "our"};

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + uniform_index(rng, hi - lo + 1);
}

std::size_t draw(Rng& rng, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = uniform_real(rng, 0.0, total);
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

double standard_normal(Rng& rng) {
  // Box-Muller on the portable uniform source.
  const double u1 = 1.0 - uniform_real(rng, 0.0, 1.0);
  const double u2 = uniform_real(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string make_id(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

std::string sentence_text(Rng& rng, const Topic& topic, const CorpusOptions& o) {
  const auto& background = background_words();
  std::string text;
  const std::size_t n = uniform_between(rng, o.min_topic_words, o.max_topic_words);
  auto append = [&](const std::string& w) {
    if (!text.empty()) text += ' ';
    text += w;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (uniform_real(rng, 0.0, 1.0) < o.stopword_rate) {
      append(kFillerStopwords[uniform_index(rng, kFillerStopwords.size())]);
    }
    append(topic.words[uniform_index(rng, topic.words.size())]);
    if (uniform_real(rng, 0.0, 1.0) < o.background_rate) {
      append(background[uniform_index(rng, background.size())]);
    }
  }
  text[0] = static_cast<char>(text[0] - 'a' + 'A');
  return text + '.';
}

AspectDistribution noisy_dominant(Rng& rng, std::size_t aspects, std::size_t dominant,
                                  double dominance, double noise) {
  std::vector<double> logits(aspects);
  for (std::size_t k = 0; k < aspects; ++k) {
    logits[k] = (k == dominant ? dominance : 0.0) + noise * standard_normal(rng);
  }
  return AspectDistribution(softmax(logits));
}

std::size_t archetype_aspect(Rng& rng, double axis, const PopulationOptions& o) {
  const double u = uniform_real(rng, 0.0, 1.0);
  if (u < o.archetype_share * axis) return 1;
  if (u < o.archetype_share) return 0;
  return 2 + uniform_index(rng, o.aspects - 2);
}

}  // namespace

const std::vector<Topic>& planted_topics() {
  static const std::vector<Topic> topics = {
      {"location",
       {"walk", "subway", "station", "downtown", "neighborhood", "restaurants", "shops", "metro",
        "bus", "central", "close", "nearby", "distance", "blocks", "minutes", "located",
        "convenient", "area", "transit", "park"}},
      {"cleanliness",
       {"clean", "spotless", "tidy", "dirty", "dust", "towels", "sheets", "linens", "bathroom",
        "shower", "fresh", "smell", "stains", "hair", "vacuum", "floors", "sink", "hygiene",
        "immaculate", "cleaned"}},
      {"communication",
       {"host", "responsive", "replied", "message", "communication", "quickly", "helpful",
        "answered", "questions", "instructions", "checkin", "keys", "contact", "texted", "email",
        "friendly", "welcoming", "prompt", "informed", "respond"}},
      {"amenities",
       {"kitchen", "wifi", "coffee", "parking", "washer", "dryer", "heating", "pool", "television",
        "balcony", "fridge", "microwave", "oven", "shampoo", "hairdryer", "iron", "bed", "pillows",
        "mattress", "couch"}},
      {"value",
       {"price", "value", "worth", "cheap", "expensive", "money", "budget", "deal", "affordable",
        "cost", "fee", "fees", "rate", "paid", "pricey", "bargain", "overpriced", "discount",
        "reasonable", "pay"}},
  };
  return topics;
}

const std::vector<std::string>& background_words() {
  static const std::vector<std::string> words = {
      "great", "stay",      "place",     "nice", "good", "really",    "would", "definitely",
      "lovely", "perfect", "everything", "time", "trip", "apartment", "recommend"};
  return words;
}

std::size_t PlantedCorpus::topic_of(const std::string& review_id, std::size_t position) const {
  const auto it = sentence_topics.find(review_id);
  if (it == sentence_topics.end() || position >= it->second.size()) {
    throw InvalidArgument("topic_of: unknown sentence " + review_id + "#" +
                          std::to_string(position));
  }
  return it->second[position];
}

std::size_t PlantedCorpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& [id, topics] : sentence_topics) n += topics.size();
  return n;
}

PlantedCorpus generate_corpus(const CorpusOptions& o) {
  const auto& all_topics = planted_topics();
  if (o.topics < 1 || o.topics > all_topics.size()) {
    throw InvalidArgument("generate_corpus: topics must be in [1, " +
                          std::to_string(all_topics.size()) + "]");
  }
  if (o.listings < 1 || o.guests < 1 || o.min_reviews < 1 || o.min_reviews > o.max_reviews) {
    throw InvalidArgument("generate_corpus: bad listing, guest or review count");
  }
  if (o.min_sentences < 1 || o.min_sentences > o.max_sentences || o.min_topic_words < 1 ||
      o.min_topic_words > o.max_topic_words) {
    throw InvalidArgument("generate_corpus: bad sentence or word count range");
  }

  Rng rng(o.seed);
  PlantedCorpus corpus;
  for (std::size_t t = 0; t < o.topics; ++t) {
    corpus.topic_names.push_back(all_topics[t].name);
    for (const auto& w : all_topics[t].words) corpus.topic_of_word[w] = t;
  }

  std::vector<std::vector<double>> guest_pref(o.guests, std::vector<double>(o.topics));
  for (auto& pref : guest_pref) {
    const std::size_t favorite = uniform_index(rng, o.topics);
    for (std::size_t t = 0; t < o.topics; ++t) {
      pref[t] = 0.4 / static_cast<double>(o.topics) + (t == favorite ? 0.6 : 0.0);
    }
  }

  const std::chrono::sys_days start{std::chrono::year{2015} / 1 / 1};
  std::size_t review_number = 0;
  for (std::size_t l = 0; l < o.listings; ++l) {
    std::vector<double> listing_pref(o.topics);
    for (double& w : listing_pref) w = uniform_real(rng, 0.5, 1.5);
    const double listing_total = std::accumulate(listing_pref.begin(), listing_pref.end(), 0.0);
    for (double& w : listing_pref) w /= listing_total;

    const std::size_t reviews = uniform_between(rng, o.min_reviews, o.max_reviews);
    for (std::size_t r = 0; r < reviews; ++r) {
      RawReview review;
      review.review_id = make_id("r", ++review_number, 6);
      review.listing_id = make_id("L", l + 1, 3);
      const std::size_t guest = uniform_index(rng, o.guests);
      review.guest_id = make_id("g", guest + 1, 4);
      review.date = std::chrono::year_month_day{
          start + std::chrono::days{static_cast<int>(uniform_index(rng, 1500))}};

      std::vector<double> mix(o.topics);
      for (std::size_t t = 0; t < o.topics; ++t) {
        mix[t] = o.guest_weight * guest_pref[guest][t] + (1.0 - o.guest_weight) * listing_pref[t];
      }
      auto& topics = corpus.sentence_topics[review.review_id];
      const std::size_t n = uniform_between(rng, o.min_sentences, o.max_sentences);
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t t = draw(rng, mix);
        topics.push_back(t);
        if (!review.text.empty()) review.text += ' ';
        review.text += sentence_text(rng, all_topics[t], o);
      }
      corpus.reviews.push_back(std::move(review));
    }
  }
  return corpus;
}

double cluster_purity(std::span<const std::size_t> clusters, std::span<const std::size_t> truth) {
  if (clusters.size() != truth.size()) {
    throw InvalidArgument("cluster_purity: clusters and truth differ in length");
  }
  if (clusters.empty()) throw InvalidArgument("cluster_purity: no items");
  std::map<std::size_t, std::map<std::size_t, std::size_t>> table;
  for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][truth[i]];
  std::size_t matched = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t best = 0;
    for (const auto& [label, n] : counts) best = std::max(best, n);
    matched += best;
  }
  return static_cast<double>(matched) / static_cast<double>(clusters.size());
}

std::size_t majority_topic(std::span<const std::string> words,
                           const std::map<std::string, std::size_t>& topic_of_word) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& w : words) {
    const auto it = topic_of_word.find(w);
    if (it != topic_of_word.end()) ++counts[it->second];
  }
  if (counts.empty()) throw InvalidArgument("majority_topic: none of the words is planted");
  std::size_t best = counts.begin()->first;
  for (const auto& [topic, n] : counts) {
    if (n > counts[best]) best = topic;
  }
  return best;
}

Population generate_population(const PopulationOptions& o) {
  if (o.aspects < 3) throw InvalidArgument("generate_population: need at least 3 aspects");
  if (o.guests < 2 || o.listings < 1 || o.guest_sentences < 1) {
    throw InvalidArgument("generate_population: need >= 2 guests, >= 1 listing and sentences");
  }
  if (o.min_reviews < 1 || o.min_reviews > o.max_reviews || o.min_sentences < 1 ||
      o.min_sentences > o.max_sentences) {
    throw InvalidArgument("generate_population: bad review or sentence count range");
  }
  Rng rng(o.seed);
  Population population;
  for (std::size_t g = 0; g < o.guests; ++g) {
    const double axis = uniform_real(rng, 0.0, 1.0);
    std::vector<AspectDistribution> sentences;
    for (std::size_t s = 0; s < o.guest_sentences; ++s) {
      sentences.push_back(
          noisy_dominant(rng, o.aspects, archetype_aspect(rng, axis, o), o.dominance, o.noise));
    }
    population.guest_axis.push_back(axis);
    population.profiles.push_back(aggregate_bos(make_id("g", g + 1, 4), sentences));
  }
  std::size_t review_number = 0;
  for (std::size_t l = 0; l < o.listings; ++l) {
    const double axis = uniform_real(rng, 0.0, 1.0);
    ListingItem listing{make_id("L", l + 1, 3), {}};
    const std::size_t reviews = uniform_between(rng, o.min_reviews, o.max_reviews);
    for (std::size_t r = 0; r < reviews; ++r) {
      ReviewItem review{make_id("r", ++review_number, 6), {}};
      const std::size_t n = uniform_between(rng, o.min_sentences, o.max_sentences);
      for (std::size_t s = 0; s < n; ++s) {
        review.sentences.push_back(
            {review.review_id + "#" + std::to_string(s),
             noisy_dominant(rng, o.aspects, archetype_aspect(rng, axis, o), o.dominance,
                            o.noise)});
      }
      listing.reviews.push_back(std::move(review));
    }
    population.listings.push_back(std::move(listing));
  }
  return population;
}

}  // namespace abae::synthetic
