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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace abae {

using TokenIds = std::span<const int>;
using WordSet = std::unordered_set<std::string>;

struct RawReview {
  std::string review_id;
  std::string listing_id;
  std::string guest_id;
  std::chrono::year_month_day date;
  std::string text;
};

// Review input is one record per line:
//   review_id TAB listing_id TAB guest_id TAB YYYY-MM-DD TAB text
// The text is everything after the fourth tab. Blank lines and lines
// starting with '#' are skipped.
RawReview parse_review_line(std::string_view line, std::size_t line_number = 0);
std::vector<RawReview> read_reviews(std::istream& in);
void write_reviews(std::ostream& out, std::span<const RawReview> reviews);

std::chrono::year_month_day parse_date(std::string_view text);
std::string format_date(std::chrono::year_month_day date);

// Segmentation rules: a run of '.', '!' or '?' (plus trailing closing quotes
// or brackets) ends a sentence when followed by whitespace and an uppercase
// ASCII letter, or by the end of the text. A '.' does not end a sentence
// when the word before it is a listed abbreviation or a single letter.
struct SegmenterRules {
  WordSet abbreviations;

  static const SegmenterRules& defaults();
};

std::vector<std::string> segment_sentences(std::string_view text,
                                           const SegmenterRules& rules = SegmenterRules::defaults());

// The shipped stopword list (core/data/stopwords.txt).
const WordSet& default_stopwords();
// One word per line; '#' starts a comment line.
WordSet read_word_list(std::istream& in);

// Lowercases, splits on anything that is not an ASCII letter/digit or a
// non-ASCII byte, and drops stopwords. Order is preserved.
std::vector<std::string> tokenize_and_filter(std::string_view sentence, const WordSet& stopwords);

// Share of ASCII bytes among the letter-like bytes of `text`; 1 for text with
// no letters.
double ascii_letter_ratio(std::string_view text);

using WordCounts = std::unordered_map<std::string, std::int64_t>;

class Vocabulary {
 public:
  static constexpr std::size_t kDefaultMaxSize = 9000;

  Vocabulary() = default;
  // Keeps the `max_size` most frequent words; ties are broken
  // lexicographically. Throws "empty corpus" when `counts` is empty.
  static Vocabulary build(const WordCounts& counts, std::size_t max_size = kDefaultMaxSize);

  std::size_t size() const { return words_.size(); }
  std::size_t max_size() const { return max_size_; }
  std::optional<int> id_of(std::string_view word) const;
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::int64_t frequency(int id) const { return frequencies_.at(static_cast<std::size_t>(id)); }
  std::span<const std::string> words() const { return words_; }
  std::span<const std::int64_t> frequencies() const { return frequencies_; }

  // FNV-1a over the words in id order; binds models to a vocabulary.
  std::uint64_t hash() const;

  // "word TAB frequency" lines in id order.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in, std::size_t max_size = kDefaultMaxSize);

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && frequencies_ == other.frequencies_;
  }

 private:
  Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> frequencies,
             std::size_t max_size);

  std::vector<std::string> words_;
  std::vector<std::int64_t> frequencies_;
  std::unordered_map<std::string, int> ids_;
  std::size_t max_size_ = kDefaultMaxSize;
};

std::uint64_t vocabulary_hash(std::span<const std::string> words);

struct EncodedSentence {
  std::vector<int> token_ids;
  std::string review_id;
  std::string listing_id;
  std::string guest_id;
  std::chrono::year_month_day date{};
  std::size_t position = 0;  // index of the sentence within its review
  std::string text;
};

struct CorpusStats {
  std::size_t tokens = 0;
  std::size_t sentences = 0;
  std::size_t guests = 0;
  std::size_t listings = 0;
  std::size_t reviews = 0;
};

class EncodedCorpus {
 public:
  EncodedCorpus() = default;
  explicit EncodedCorpus(std::vector<EncodedSentence> sentences);

  std::span<const EncodedSentence> sentences() const { return sentences_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  const EncodedSentence& operator[](std::size_t i) const { return sentences_[i]; }

  // Sentence indexes grouped by listing / guest / review, in corpus order.
  const std::map<std::string, std::vector<std::size_t>>& by_listing() const { return by_listing_; }
  const std::map<std::string, std::vector<std::size_t>>& by_guest() const { return by_guest_; }
  const std::map<std::string, std::vector<std::size_t>>& by_review() const { return by_review_; }

  std::vector<std::vector<int>> token_lists() const;
  CorpusStats stats() const;

  // Sub-corpus with the sentences at `indexes` (in the given order).
  EncodedCorpus subset(std::span<const std::size_t> indexes) const;

  // Line format (after a "#abae-corpus v1" header):
  //   review_id TAB listing_id TAB guest_id TAB date TAB position TAB
  //   space-separated token ids TAB sentence text
  void write(std::ostream& out) const;
  static EncodedCorpus read(std::istream& in);

 private:
  std::vector<EncodedSentence> sentences_;
  std::map<std::string, std::vector<std::size_t>> by_listing_;
  std::map<std::string, std::vector<std::size_t>> by_guest_;
  std::map<std::string, std::vector<std::size_t>> by_review_;
};

struct PreprocessOptions {
  std::size_t max_vocabulary = Vocabulary::kDefaultMaxSize;
  // Optional stand-in for language identification: drop sentences whose
  // ASCII letter ratio is below the threshold.
  bool ascii_filter = false;
  double min_ascii_ratio = 0.9;
  const WordSet* stopwords = nullptr;         // nullptr: default_stopwords()
  const SegmenterRules* segmenter = nullptr;  // nullptr: SegmenterRules::defaults()
};

struct TokenizedSentence {
  std::vector<std::string> tokens;
  std::string text;
  std::size_t review_index = 0;
  std::size_t position = 0;
};

std::vector<TokenizedSentence> tokenize_reviews(std::span<const RawReview> reviews,
                                                const PreprocessOptions& options = {});
WordCounts count_words(std::span<const TokenizedSentence> sentences);

// Out-of-vocabulary tokens are dropped and sentences left empty are dropped.
EncodedCorpus encode_corpus(std::span<const RawReview> reviews, const Vocabulary& vocabulary,
                            const PreprocessOptions& options = {});

struct PreprocessResult {
  Vocabulary vocabulary;
  EncodedCorpus corpus;
};
PreprocessResult preprocess(std::span<const RawReview> reviews, const PreprocessOptions& options = {});

struct SplitRules {
  std::size_t min_listing_reviews = 50;
  std::size_t max_listing_reviews = 100;
  std::size_t min_summarize_sentences = 3;
  double summarize_test_fraction = 0.19;
  std::size_t min_guest_sentences = 10;
  std::size_t rank_val_guests = 20;
  std::size_t min_rank_test_sentences = 20;
  // Share of the remaining sentences sampled into train.
  double train_fraction = 1.0;
  std::uint64_t seed = 1;
};

struct DatasetSplits {
  EncodedCorpus train;
  EncodedCorpus summarize_val;
  EncodedCorpus summarize_test;
  EncodedCorpus rank_val;
  EncodedCorpus rank_test;
};

// Listings with a review count in [min, max] and enough sentences are held
// out of train and split into summarize val/test; `rank_val_guests` guests
// with enough sentences are held out of train; rank_test is the summarize
// test listings with at least `min_rank_test_sentences` sentences. Throws
// InvalidArgument naming the rule that cannot be satisfied.
DatasetSplits split_datasets(const EncodedCorpus& corpus, const SplitRules& rules);

}  // namespace abae
