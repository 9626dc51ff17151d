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
#include "abae/numerics.hpp"

namespace abae {

struct LdaOptions {
  std::size_t topics = 30;
  // Non-positive values select the default 1/K.
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t iterations = 200;
  std::uint64_t seed = 1;
};

// Topic-word statistics of a collapsed Gibbs LDA fit.
struct LdaModel {
  std::size_t topics = 0;
  std::size_t vocabulary_size = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::int64_t> topic_word;   // topics x vocabulary_size, row-major
  std::vector<std::int64_t> topic_totals;  // per topic

  std::int64_t count(std::size_t topic, std::size_t word) const {
    return topic_word[topic * vocabulary_size + word];
  }
  // phi_{k,w} = (n_kw + beta) / (n_k + V beta)
  double phi(std::size_t topic, std::size_t word) const;
};

// Normalized collapsed-Gibbs conditional over topics for one token:
//   p(z = k) proportional to (n_dk + alpha) (n_kw + beta) / (n_k + V beta)
// where the counts already exclude the token being resampled.
Vector lda_topic_conditional(std::span<const std::int64_t> doc_topic,
                             std::span<const std::int64_t> word_topic,
                             std::span<const std::int64_t> topic_totals, double alpha,
                             double beta, std::size_t vocabulary_size);

// Sampler state for one corpus. Each call to sweep() resamples every token
// once in document order.
class LdaSampler {
 public:
  LdaSampler(std::vector<std::vector<int>> documents, std::size_t vocabulary_size,
             const LdaOptions& options);

  void sweep();

  const LdaModel& model() const { return model_; }
  std::size_t documents() const { return docs_.size(); }
  std::span<const std::int64_t> doc_topic(std::size_t doc) const {
    return {doc_topic_.data() + doc * model_.topics, model_.topics};
  }
  std::span<const int> assignments(std::size_t doc) const { return assignments_[doc]; }
  std::span<const int> document(std::size_t doc) const { return docs_[doc]; }

  // Recomputes every count from the assignments and compares.
  bool counts_consistent() const;

 private:
  std::vector<std::vector<int>> docs_;
  std::vector<std::vector<int>> assignments_;
  std::vector<std::int64_t> doc_topic_;
  LdaModel model_;
  Rng rng_;
  Vector weights_;
};

// Empty documents are skipped; throws when every document is empty.
LdaModel lda_fit(std::span<const std::vector<int>> documents, std::size_t vocabulary_size,
                 const LdaOptions& options);

// Held-out Gibbs sampling against frozen topic-word counts. Returns the
// smoothed doc-topic proportions averaged over the second half of the
// sweeps. Ids outside the vocabulary are ignored; throws "no observed
// tokens" when none remain.
AspectDistribution lda_infer(TokenIds sentence, const LdaModel& model, std::size_t iterations = 50,
                             std::uint64_t seed = 1);

// The n most probable words of a topic; ties go to the lower id.
std::vector<int> lda_top_words(const LdaModel& model, std::size_t topic, std::size_t n);

// "lda v1 K V alpha beta" header, then one line of V counts per topic.
void write_lda(std::ostream& out, const LdaModel& model);
LdaModel read_lda(std::istream& in);

}  // namespace abae
