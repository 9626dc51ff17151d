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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "abae/aspects.hpp"

namespace abae {

struct CandidateSentence {
  std::string text;
  std::vector<int> token_ids;
};

struct ExtractedSentence {
  std::string listing_id;
  AspectLabel aspect = AspectLabel::other;
  Method method = Method::abae;
  std::string text;
  std::size_t rank = 0;  // 1-based
  double score = 0.0;
};

struct Extraction {
  std::vector<ExtractedSentence> sentences;
  // Set when the listing had fewer than k candidates.
  bool short_listing = false;
};

// Top-k candidates of one listing for `label`, scored by the model's
// extraction_score against the merged representative of the label's
// clusters. Ties keep candidate order.
Extraction extract_top_sentences(const std::string& listing_id,
                                 std::span<const CandidateSentence> candidates, AspectLabel label,
                                 const AspectModel& model, const AspectLabeling& labeling,
                                 std::size_t k = 3);

// Verdicts of one (listing, aspect, method) group keyed by 1-based rank.
using VerdictGroup = std::map<std::size_t, int>;

// Mean over groups of (positive verdicts among ranks 1..k) / k. Throws when a
// group is missing one of those ranks.
double precision_at_k(std::span<const VerdictGroup> groups, std::size_t k);

// Fleiss' kappa for an items x categories count matrix; every row must sum
// to the same n >= 2. When chance agreement is 1 the result is 1.
double fleiss_kappa(std::span<const std::vector<int>> counts);

struct SheetOptions {
  std::size_t annotators = 3;
  // Share of examples given to every annotator for agreement scoring.
  double overlap_fraction = 795.0 / 4536.0;
  std::uint64_t seed = 1;
};

// What an example is; kept away from the annotators.
struct ExampleKey {
  std::string example_id;
  std::string listing_id;
  AspectLabel aspect = AspectLabel::other;
  Method method = Method::abae;
  std::size_t rank = 0;
  std::string sentence;
  bool overlap = false;
};

struct SheetRow {
  std::string example_id;
  std::string listing_id;
  std::string sentence;
  AspectLabel aspect = AspectLabel::other;
  std::optional<int> verdict;
  std::string annotator;
};

struct EvaluationSheets {
  std::vector<ExampleKey> key;
  std::vector<SheetRow> rows;  // every annotator's rows, grouped by annotator
};

// Shuffles the examples, gives round(overlap_fraction * N) of them to every
// annotator and deals the rest out round-robin.
EvaluationSheets build_evaluation_sheet(std::span<const ExtractedSentence> extracted,
                                        const SheetOptions& options);

// Columns: example_id, listing_id, sentence, aspect, verdict, annotator.
void write_sheet(std::ostream& out, std::span<const SheetRow> rows);
std::vector<SheetRow> read_sheet(std::istream& in);

// Columns: example_id, listing_id, aspect, method, rank, overlap, sentence.
void write_key(std::ostream& out, std::span<const ExampleKey> key);
std::vector<ExampleKey> read_key(std::istream& in);

struct PrecisionCell {
  double at1 = 0.0;
  double at3 = 0.0;
  std::size_t groups = 0;
};

struct JudgmentSummary {
  std::map<std::pair<Method, AspectLabel>, PrecisionCell> precision;
  double kappa = 0.0;
  std::size_t kappa_items = 0;
};

// Joins judged rows with the key. Examples judged by several annotators are
// resolved by majority (ties count as 0) for precision; kappa uses the
// examples judged by every annotator.
JudgmentSummary evaluate_judgments(std::span<const ExampleKey> key,
                                   std::span<const SheetRow> judged);

// Method x aspect table of "P@1/P@3" cells plus the kappa line.
void write_precision_table(std::ostream& out, const JudgmentSummary& summary);

}  // namespace abae
