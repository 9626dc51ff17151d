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
#include <span>
#include <vector>

#include "abae/corpus.hpp"
#include "abae/distribution.hpp"
#include "abae/embeddings.hpp"
#include "abae/kmeans.hpp"
#include "abae/numerics.hpp"

namespace abae {

struct AbaeConfig {
  std::size_t aspects = 30;
  std::size_t batch_size = 50;
  std::size_t negatives = 20;
  double ortho_weight = 0.1;
  double learning_rate = 0.001;
  double margin = 1.0;
  std::size_t epochs = 15;
  // M starts at I + uniform(+-attention_init_noise); W and b at
  // uniform(+-classifier_init_range).
  double attention_init_noise = 0.01;
  double classifier_init_range = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
};

// Parameters of the attention-based aspect autoencoder. `embeddings` (E) is
// a frozen copy of the word vectors; training never writes to it.
struct AbaeModel {
  Matrix embeddings;  // V x d
  Matrix attention;   // M, d x d
  Matrix classifier;  // W, K x d
  Vector bias;        // b, K
  Matrix aspects;     // T, K x d
  std::uint64_t vocabulary_hash = 0;

  std::size_t num_aspects() const { return aspects.rows(); }
  std::size_t dimension() const { return embeddings.cols(); }
  std::size_t vocabulary_size() const { return embeddings.rows(); }

  // Throws InvalidArgument on inconsistent shapes or non-finite values.
  void validate() const;
};

// Uniform bag of words: y = sum of the word embeddings.
Vector bag_of_words(TokenIds sentence, const Matrix& embeddings);

// a_i = softmax_i(e_i^T M y).
Vector attention_weights(TokenIds sentence, const AbaeModel& model);

// z = sum_i a_i e_i.
Vector sentence_embedding(TokenIds sentence, const AbaeModel& model);

// p = softmax(W z + b).
AspectDistribution aspect_probabilities(std::span<const double> z, const AbaeModel& model);

// r = T^T p.
Vector reconstruct(std::span<const double> p, const AbaeModel& model);

// sum over negatives of max(0, margin - cos(r_s, z_s) + cos(r_s, y_n)); the
// negatives are encoded as uniform bags of words.
double hinge_loss(TokenIds sentence, std::span<const TokenIds> negatives, const AbaeModel& model,
                  double margin = 1.0);

// || Tn Tn^T - I ||_F with Tn the row-normalized T. Throws on a zero row.
double orthogonality_penalty(const Matrix& aspects);
// Gradient of orthogonality_penalty with respect to T (zero at the minimum).
Matrix orthogonality_penalty_gradient(const Matrix& aspects);

struct TrainingExample {
  TokenIds sentence;
  std::vector<TokenIds> negatives;
};

// J = sum over the batch of hinge_loss + ortho_weight * penalty(T).
double abae_objective(std::span<const TrainingExample> batch, const AbaeModel& model,
                      const AbaeConfig& config);

struct AbaeGradients {
  Matrix attention;
  Matrix classifier;
  Vector bias;
  Matrix aspects;
  double objective = 0.0;
};

// Analytic gradient of abae_objective for M, W, b and T. E gets none.
AbaeGradients abae_backward(std::span<const TrainingExample> batch, const AbaeModel& model,
                            const AbaeConfig& config);

// Random initialization around the given aspect matrix (usually k-means
// centroids of the word embeddings).
AbaeModel initialize_abae(const EmbeddingTable& embeddings, const Matrix& initial_aspects,
                          const AbaeConfig& config);

// Trains with Adam on mini-batches of `corpus`, starting T from the k-means
// centroids. `epoch_objectives` receives the mean objective per sentence of
// each epoch.
AbaeModel train_abae(const EncodedCorpus& corpus, const EmbeddingTable& embeddings,
                     const KMeansModel& init, const AbaeConfig& config,
                     std::vector<double>* epoch_objectives = nullptr);

struct SentenceInference {
  AspectDistribution aspects;  // p_s
  Vector embedding;            // z_s
};

SentenceInference infer_sentence(TokenIds sentence, const AbaeModel& model);

// Binary checkpoint, little-endian:
//   "ABAECKPT" | u32 version=1 | u32 K | u32 d | u32 V | u64 vocabulary hash
//   | f32 M[d*d] | f32 W[K*d] | f32 b[K] | f32 T[K*d]
// E is not stored; loading binds to `embeddings`, whose shape and
// vocabulary hash must match the header.
void save_checkpoint(std::ostream& out, const AbaeModel& model);
AbaeModel load_checkpoint(std::istream& in, const EmbeddingTable& embeddings);

}  // namespace abae
