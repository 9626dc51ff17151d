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

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abae/abae.hpp"
#include "abae/corpus.hpp"
#include "abae/distribution.hpp"
#include "abae/kmeans.hpp"
#include "abae/lda.hpp"
#include "abae/numerics.hpp"

namespace abae {

enum class Method { abae, kmeans, lda };
enum class AspectLabel { location, cleanliness, communication, other };

inline constexpr std::array<AspectLabel, 4> kAllLabels = {
    AspectLabel::location, AspectLabel::cleanliness, AspectLabel::communication,
    AspectLabel::other};
// The labels that summaries are extracted for.
inline constexpr std::array<AspectLabel, 3> kTargetLabels = {
    AspectLabel::location, AspectLabel::cleanliness, AspectLabel::communication};
inline constexpr std::array<Method, 3> kAllMethods = {Method::kmeans, Method::lda, Method::abae};

std::string_view to_string(Method method);
std::string_view to_string(AspectLabel label);
Method parse_method(std::string_view text);
AspectLabel parse_label(std::string_view text);

// The common inference surface over ABAE, k-means and LDA.
class AspectModel {
 public:
  virtual ~AspectModel() = default;

  virtual Method method() const = 0;
  virtual std::size_t num_aspects() const = 0;
  virtual std::size_t vocabulary_size() const = 0;

  // Word ids most associated with a cluster. Throws when n > V.
  virtual std::vector<int> top_words(std::size_t aspect, std::size_t n) const = 0;
  // Distribution of a sentence over the K clusters.
  virtual AspectDistribution infer(TokenIds sentence) const = 0;
  // Similarity of the sentence representation to each cluster representative.
  virtual Vector cluster_similarities(TokenIds sentence) const = 0;
  // Ranking score of a sentence for the merged representative of `clusters`;
  // larger is better.
  virtual double extraction_score(TokenIds sentence,
                                  std::span<const std::size_t> clusters) const = 0;
};

// ABAE: the sentence representation is z_s; clusters are the rows of T.
class AbaeAspectModel final : public AspectModel {
 public:
  explicit AbaeAspectModel(const AbaeModel& model) : model_(&model) {}

  Method method() const override { return Method::abae; }
  std::size_t num_aspects() const override { return model_->num_aspects(); }
  std::size_t vocabulary_size() const override { return model_->vocabulary_size(); }
  std::vector<int> top_words(std::size_t aspect, std::size_t n) const override;
  AspectDistribution infer(TokenIds sentence) const override;
  Vector cluster_similarities(TokenIds sentence) const override;
  double extraction_score(TokenIds sentence, std::span<const std::size_t> clusters) const override;

 private:
  const AbaeModel* model_;
};

// k-means: the sentence representation is the mean word embedding; the
// distribution is a softmax over cosine similarities to the centroids.
class KMeansAspectModel final : public AspectModel {
 public:
  // `embeddings` must be the vectors the centroids were fitted on.
  KMeansAspectModel(const KMeansModel& model, const Matrix& embeddings);

  Method method() const override { return Method::kmeans; }
  std::size_t num_aspects() const override { return model_->clusters(); }
  std::size_t vocabulary_size() const override { return embeddings_->rows(); }
  std::vector<int> top_words(std::size_t aspect, std::size_t n) const override;
  AspectDistribution infer(TokenIds sentence) const override;
  Vector cluster_similarities(TokenIds sentence) const override;
  double extraction_score(TokenIds sentence, std::span<const std::size_t> clusters) const override;

  Vector mean_embedding(TokenIds sentence) const;

 private:
  const KMeansModel* model_;
  const Matrix* embeddings_;
};

// LDA: the sentence representation is its inferred topic posterior.
class LdaAspectModel final : public AspectModel {
 public:
  explicit LdaAspectModel(const LdaModel& model, std::size_t iterations = 50,
                          std::uint64_t seed = 1)
      : model_(&model), iterations_(iterations), seed_(seed) {}

  Method method() const override { return Method::lda; }
  std::size_t num_aspects() const override { return model_->topics; }
  std::size_t vocabulary_size() const override { return model_->vocabulary_size; }
  std::vector<int> top_words(std::size_t aspect, std::size_t n) const override;
  AspectDistribution infer(TokenIds sentence) const override;
  Vector cluster_similarities(TokenIds sentence) const override;
  double extraction_score(TokenIds sentence, std::span<const std::size_t> clusters) const override;

 private:
  const LdaModel* model_;
  std::size_t iterations_;
  std::uint64_t seed_;
};

// Cluster -> label assignment, total over the K clusters.
struct AspectLabeling {
  Method method = Method::abae;
  std::vector<AspectLabel> labels;  // indexed by cluster id

  std::vector<std::size_t> clusters_for(AspectLabel label) const;
};

// "cluster_id TAB label" lines; every cluster in [0, K) exactly once.
AspectLabeling read_labeling(std::istream& in, Method method, std::size_t clusters);
void write_labeling(std::ostream& out, const AspectLabeling& labeling);

// Unweighted mean of the rows mapped to `label`. Throws when none are.
Vector merged_aspect_embedding(const AspectLabeling& labeling, AspectLabel label,
                               const Matrix& rows);

using LabelShares = std::array<double, kAllLabels.size()>;

// Soft-count prevalence: per sentence, softmax over cluster similarities,
// fractions summed per label and divided by the sentence count.
LabelShares aspect_prevalence(std::span<const TokenIds> sentences, const AspectLabeling& labeling,
                              const AspectModel& model);

// Inverted index over documents (sentences) for co-document frequencies.
class DocumentIndex {
 public:
  DocumentIndex(std::span<const std::vector<int>> documents, std::size_t vocabulary_size);

  std::size_t documents() const { return documents_; }
  std::size_t document_frequency(int word) const;
  std::size_t co_document_frequency(int a, int b) const;

 private:
  std::vector<std::vector<std::uint32_t>> postings_;
  std::size_t documents_ = 0;
};

// sum_{m=2}^{M} sum_{l<m} log((D(v_m, v_l) + 1) / D(v_l)) over the ordered
// list. Throws naming the first word with D(v) = 0; `names` (optional) maps
// ids to words for that message.
double coherence_score(std::span<const int> top_words, const DocumentIndex& index,
                       std::span<const std::string> names = {});

inline constexpr std::array<std::size_t, 3> kCoherenceWordCounts = {10, 30, 50};

struct CoherenceReport {
  std::vector<std::array<double, kCoherenceWordCounts.size()>> per_aspect;

  double aspect_sum(std::size_t aspect) const;
  double column_total(std::size_t column) const;
  double total() const;
};

CoherenceReport coherence_report(const AspectModel& model, const DocumentIndex& index,
                                 std::span<const std::string> names = {});
// Tab-separated table: one row per aspect with the 10/30/50-word scores and
// their sum, then a "total" row.
void write_coherence_report(std::ostream& out, const CoherenceReport& report);

}  // namespace abae
