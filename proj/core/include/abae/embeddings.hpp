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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abae/corpus.hpp"
#include "abae/numerics.hpp"

namespace abae {

struct SgnsConfig {
  std::size_t dimension = 200;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_learning_rate = 0.025;
  // The learning rate decays linearly to initial * min_learning_rate_fraction.
  double min_learning_rate_fraction = 1e-4;
  double unigram_power = 0.75;
  std::int64_t min_count = 1;
  // Sample the effective window uniformly from [1, window] per center word.
  bool dynamic_window = true;
  std::uint64_t seed = 1;

  void validate() const;
};

// Input ("word") and output ("context") vectors for every vocabulary entry.
struct EmbeddingTable {
  std::vector<std::string> words;
  Matrix input;
  Matrix output;

  std::size_t size() const { return words.size(); }
  std::size_t dimension() const { return input.cols(); }
  std::uint64_t vocabulary_hash() const { return abae::vocabulary_hash(words); }
  std::optional<int> id_of(const std::string& word) const;
};

using TrainingPair = std::pair<int, int>;  // (center, context)

// Skip-gram pairs for one sentence. With `rng` the window for each center is
// drawn uniformly from [1, window]; without it the full window is used.
std::vector<TrainingPair> generate_training_pairs(TokenIds sentence, std::size_t window,
                                                  Rng* rng = nullptr);

// P(w) proportional to freq(w)^power.
std::vector<double> negative_sampling_distribution(std::span<const std::int64_t> frequencies,
                                                   double power = 0.75);

// Walker alias table over a fixed distribution.
class AliasSampler {
 public:
  explicit AliasSampler(std::span<const double> probabilities);
  int sample(Rng& rng) const;
  std::size_t size() const { return probability_.size(); }

 private:
  std::vector<double> probability_;
  std::vector<int> alias_;
};

// -log s(u_c . v_w) - sum_n log s(-u_n . v_w) where v_w is the center's
// input vector and u the output vectors.
double sgns_loss(int center, int context, std::span<const int> negatives,
                 const EmbeddingTable& table);

// One SGD step on sgns_loss. All gradients are taken at the pre-update
// parameters; returns the pre-update loss.
double sgns_train_step(int center, int context, std::span<const int> negatives,
                       EmbeddingTable& table, double learning_rate);

// Trains on every sentence of `corpus`. Deterministic for a given seed.
// `epoch_losses`, when given, receives the mean pair loss of each epoch.
EmbeddingTable train_embeddings(const EncodedCorpus& corpus, const Vocabulary& vocabulary,
                                const SgnsConfig& config,
                                std::vector<double>* epoch_losses = nullptr);

struct Neighbor {
  int id = 0;
  double cosine = 0.0;
};

// The k words whose input vectors are most cosine-similar to `query`,
// descending; ties go to the lower id. Zero rows score 0.
std::vector<Neighbor> nearest_words(const Matrix& vectors, std::span<const double> query,
                                    std::size_t k);

// word2vec text format: "V d" then "word v1 ... vd" per line. Values are
// written in shortest round-trip form so load/save is exact. Only the input
// vectors are stored; `output` comes back empty.
void write_word2vec_text(std::ostream& out, const EmbeddingTable& table);
EmbeddingTable read_word2vec_text(std::istream& in);

}  // namespace abae
