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

#include "abae/aspects.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "abae/embeddings.hpp"
#include "abae/error.hpp"

namespace abae {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::abae: return "abae";
    case Method::kmeans: return "kmeans";
    case Method::lda: return "lda";
  }
  return "unknown";
}

std::string_view to_string(AspectLabel label) {
  switch (label) {
    case AspectLabel::location: return "location";
    case AspectLabel::cleanliness: return "cleanliness";
    case AspectLabel::communication: return "communication";
    case AspectLabel::other: return "other";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : kAllMethods) {
    if (to_string(m) == text) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(text) + "' (expected abae, kmeans or lda)");
}

AspectLabel parse_label(std::string_view text) {
  for (AspectLabel l : kAllLabels) {
    if (to_string(l) == text) return l;
  }
  throw InvalidArgument("unknown aspect label '" + std::string(text) +
                        "' (expected location, cleanliness, communication or other)");
}

namespace {

void check_aspect(std::size_t aspect, std::size_t k) {
  if (aspect >= k) {
    throw InvalidArgument("aspect " + std::to_string(aspect) + " out of range for K = " +
                          std::to_string(k));
  }
}

std::vector<int> nearest_ids(const Matrix& vectors, std::span<const double> point, std::size_t n) {
  std::vector<int> ids;
  for (const auto& nb : nearest_words(vectors, point, n)) ids.push_back(nb.id);
  return ids;
}

Vector mean_rows(const Matrix& rows, std::span<const std::size_t> picked) {
  if (picked.empty()) throw InvalidArgument("merged representative: no clusters given");
  Vector mean(rows.cols(), 0.0);
  for (std::size_t k : picked) {
    check_aspect(k, rows.rows());
    axpy(1.0, rows.row(k), mean);
  }
  scale(1.0 / static_cast<double>(picked.size()), mean);
  return mean;
}

}  // namespace

std::vector<int> AbaeAspectModel::top_words(std::size_t aspect, std::size_t n) const {
  check_aspect(aspect, num_aspects());
  return nearest_ids(model_->embeddings, model_->aspects.row(aspect), n);
}

AspectDistribution AbaeAspectModel::infer(TokenIds sentence) const {
  return infer_sentence(sentence, *model_).aspects;
}

Vector AbaeAspectModel::cluster_similarities(TokenIds sentence) const {
  const Vector z = sentence_embedding(sentence, *model_);
  Vector sims(num_aspects());
  for (std::size_t k = 0; k < sims.size(); ++k) {
    sims[k] = cosine_similarity(z, model_->aspects.row(k));
  }
  return sims;
}

double AbaeAspectModel::extraction_score(TokenIds sentence,
                                         std::span<const std::size_t> clusters) const {
  return cosine_similarity(sentence_embedding(sentence, *model_),
                           mean_rows(model_->aspects, clusters));
}

KMeansAspectModel::KMeansAspectModel(const KMeansModel& model, const Matrix& embeddings)
    : model_(&model), embeddings_(&embeddings) {
  if (model.dimension() != embeddings.cols()) {
    throw InvalidArgument("KMeansAspectModel: centroid dimension does not match embeddings");
  }
}

Vector KMeansAspectModel::mean_embedding(TokenIds sentence) const {
  Vector mean = bag_of_words(sentence, *embeddings_);
  scale(1.0 / static_cast<double>(sentence.size()), mean);
  return mean;
}

std::vector<int> KMeansAspectModel::top_words(std::size_t aspect, std::size_t n) const {
  check_aspect(aspect, num_aspects());
  return nearest_ids(*embeddings_, model_->centroids.row(aspect), n);
}

Vector KMeansAspectModel::cluster_similarities(TokenIds sentence) const {
  const Vector mean = mean_embedding(sentence);
  Vector sims(num_aspects());
  for (std::size_t k = 0; k < sims.size(); ++k) {
    sims[k] = cosine_similarity(mean, model_->centroids.row(k));
  }
  return sims;
}

AspectDistribution KMeansAspectModel::infer(TokenIds sentence) const {
  return AspectDistribution(softmax(cluster_similarities(sentence)));
}

double KMeansAspectModel::extraction_score(TokenIds sentence,
                                           std::span<const std::size_t> clusters) const {
  return -euclidean_distance(mean_embedding(sentence), mean_rows(model_->centroids, clusters));
}

std::vector<int> LdaAspectModel::top_words(std::size_t aspect, std::size_t n) const {
  check_aspect(aspect, num_aspects());
  return lda_top_words(*model_, aspect, n);
}

AspectDistribution LdaAspectModel::infer(TokenIds sentence) const {
  return lda_infer(sentence, *model_, iterations_, seed_);
}

Vector LdaAspectModel::cluster_similarities(TokenIds sentence) const {
  const auto posterior = infer(sentence);
  return Vector(posterior.values().begin(), posterior.values().end());
}

double LdaAspectModel::extraction_score(TokenIds sentence,
                                        std::span<const std::size_t> clusters) const {
  if (clusters.empty()) throw InvalidArgument("merged representative: no clusters given");
  const auto posterior = infer(sentence);
  double mass = 0.0;
  for (std::size_t k : clusters) {
    check_aspect(k, num_aspects());
    mass += posterior[k];
  }
  return mass;
}

std::vector<std::size_t> AspectLabeling::clusters_for(AspectLabel label) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == label) out.push_back(k);
  }
  return out;
}

AspectLabeling read_labeling(std::istream& in, Method method, std::size_t clusters) {
  AspectLabeling labeling{method, std::vector<AspectLabel>(clusters, AspectLabel::other)};
  std::vector<bool> seen(clusters, false);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "mapping line " + std::to_string(line_number);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(where + ": expected 'cluster_id TAB label'");
    std::size_t cluster = 0;
    try {
      std::size_t used = 0;
      cluster = std::stoul(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError(where + ": invalid cluster id '" + line.substr(0, tab) + "'");
    }
    if (cluster >= clusters) {
      throw FormatError(where + ": cluster " + std::to_string(cluster) + " out of range for K = " +
                        std::to_string(clusters));
    }
    if (seen[cluster]) throw FormatError(where + ": cluster " + std::to_string(cluster) + " listed twice");
    try {
      labeling.labels[cluster] = parse_label(line.substr(tab + 1));
    } catch (const InvalidArgument& e) {
      throw FormatError(where + ": " + e.what());
    }
    seen[cluster] = true;
  }
  for (std::size_t k = 0; k < clusters; ++k) {
    if (!seen[k]) throw FormatError("mapping: cluster " + std::to_string(k) + " has no label");
  }
  return labeling;
}

void write_labeling(std::ostream& out, const AspectLabeling& labeling) {
  for (std::size_t k = 0; k < labeling.labels.size(); ++k) {
    out << k << '\t' << to_string(labeling.labels[k]) << '\n';
  }
}

Vector merged_aspect_embedding(const AspectLabeling& labeling, AspectLabel label,
                               const Matrix& rows) {
  if (labeling.labels.size() != rows.rows()) {
    throw InvalidArgument("merged_aspect_embedding: labeling covers " +
                          std::to_string(labeling.labels.size()) + " clusters, model has " +
                          std::to_string(rows.rows()));
  }
  const auto clusters = labeling.clusters_for(label);
  if (clusters.empty()) {
    throw InvalidArgument("merged_aspect_embedding: no cluster is labeled '" +
                          std::string(to_string(label)) + "'");
  }
  return mean_rows(rows, clusters);
}

LabelShares aspect_prevalence(std::span<const TokenIds> sentences, const AspectLabeling& labeling,
                              const AspectModel& model) {
  if (sentences.empty()) throw InvalidArgument("aspect_prevalence: empty sentence set");
  if (labeling.labels.size() != model.num_aspects()) {
    throw InvalidArgument("aspect_prevalence: labeling is not total over the model's clusters");
  }
  LabelShares shares{};
  for (TokenIds s : sentences) {
    const Vector fractions = softmax(model.cluster_similarities(s));
    for (std::size_t k = 0; k < fractions.size(); ++k) {
      shares[static_cast<std::size_t>(labeling.labels[k])] += fractions[k];
    }
  }
  for (double& x : shares) x /= static_cast<double>(sentences.size());
  return shares;
}

DocumentIndex::DocumentIndex(std::span<const std::vector<int>> documents,
                             std::size_t vocabulary_size)
    : postings_(vocabulary_size), documents_(documents.size()) {
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (int w : documents[d]) {
      if (w < 0 || static_cast<std::size_t>(w) >= vocabulary_size) continue;
      auto& list = postings_[static_cast<std::size_t>(w)];
      if (list.empty() || list.back() != d) list.push_back(static_cast<std::uint32_t>(d));
    }
  }
}

std::size_t DocumentIndex::document_frequency(int word) const {
  if (word < 0 || static_cast<std::size_t>(word) >= postings_.size()) return 0;
  return postings_[static_cast<std::size_t>(word)].size();
}

std::size_t DocumentIndex::co_document_frequency(int a, int b) const {
  if (document_frequency(a) == 0 || document_frequency(b) == 0) return 0;
  const auto& pa = postings_[static_cast<std::size_t>(a)];
  const auto& pb = postings_[static_cast<std::size_t>(b)];
  std::size_t i = 0, j = 0, count = 0;
  while (i < pa.size() && j < pb.size()) {
    if (pa[i] < pb[j]) {
      ++i;
    } else if (pb[j] < pa[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

double coherence_score(std::span<const int> top_words, const DocumentIndex& index,
                       std::span<const std::string> names) {
  for (int w : top_words) {
    if (index.document_frequency(w) == 0) {
      const bool named = w >= 0 && static_cast<std::size_t>(w) < names.size();
      throw InvalidArgument("coherence_score: word '" +
                            (named ? names[static_cast<std::size_t>(w)] : std::to_string(w)) +
                            "' occurs in no document");
    }
  }
  double score = 0.0;
  for (std::size_t m = 1; m < top_words.size(); ++m) {
    for (std::size_t l = 0; l < m; ++l) {
      const double co = static_cast<double>(index.co_document_frequency(top_words[m], top_words[l]));
      score += std::log((co + 1.0) / static_cast<double>(index.document_frequency(top_words[l])));
    }
  }
  return score;
}

double CoherenceReport::aspect_sum(std::size_t aspect) const {
  double s = 0.0;
  for (double x : per_aspect.at(aspect)) s += x;
  return s;
}

double CoherenceReport::column_total(std::size_t column) const {
  double s = 0.0;
  for (const auto& row : per_aspect) s += row.at(column);
  return s;
}

double CoherenceReport::total() const {
  double s = 0.0;
  for (std::size_t a = 0; a < per_aspect.size(); ++a) s += aspect_sum(a);
  return s;
}

CoherenceReport coherence_report(const AspectModel& model, const DocumentIndex& index,
                                 std::span<const std::string> names) {
  CoherenceReport report;
  const std::size_t widest = kCoherenceWordCounts.back();
  for (std::size_t k = 0; k < model.num_aspects(); ++k) {
    const auto words = model.top_words(k, widest);
    std::array<double, kCoherenceWordCounts.size()> row{};
    for (std::size_t c = 0; c < kCoherenceWordCounts.size(); ++c) {
      row[c] = coherence_score(std::span<const int>(words).first(kCoherenceWordCounts[c]), index,
                               names);
    }
    report.per_aspect.push_back(row);
  }
  return report;
}

void write_coherence_report(std::ostream& out, const CoherenceReport& report) {
  char buf[64];
  out << "aspect";
  for (std::size_t n : kCoherenceWordCounts) out << '\t' << n;
  out << "\tsum\n";
  auto cell = [&](double x) {
    std::snprintf(buf, sizeof buf, "\t%.4f", x);
    out << buf;
  };
  for (std::size_t a = 0; a < report.per_aspect.size(); ++a) {
    out << a;
    for (double x : report.per_aspect[a]) cell(x);
    cell(report.aspect_sum(a));
    out << '\n';
  }
  out << "total";
  for (std::size_t c = 0; c < kCoherenceWordCounts.size(); ++c) cell(report.column_total(c));
  cell(report.total());
  out << '\n';
}

}  // namespace abae
