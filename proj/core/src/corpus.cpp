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

#include "abae/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "abae/error.hpp"
#include "abae/numerics.hpp"
#include "word_lists.hpp"

namespace abae {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || is_upper(c); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closing(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = to_lower(c);
  return out;
}

WordSet parse_word_list(std::string_view text) {
  WordSet words;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    if (!line.empty() && line.front() != '#') words.insert(lowercase(line));
    start = end + 1;
  }
  return words;
}

std::string single_line(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line, std::size_t max_fields) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (fields.size() + 1 < max_fields) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) break;
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  fields.push_back(line.substr(start));
  return fields;
}

template <typename T>
T parse_integer(std::string_view text, const std::string& what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(what + ": expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::string location(std::size_t line_number) {
  return line_number == 0 ? std::string("review record") : "line " + std::to_string(line_number);
}

}  // namespace

std::chrono::year_month_day parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw FormatError("date '" + std::string(text) + "' is not YYYY-MM-DD");
  }
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!is_digit(text[i])) throw FormatError("date '" + std::string(text) + "' is not YYYY-MM-DD");
  }
  const int y = parse_integer<int>(text.substr(0, 4), "year");
  const unsigned m = parse_integer<unsigned>(text.substr(5, 2), "month");
  const unsigned d = parse_integer<unsigned>(text.substr(8, 2), "day");
  const std::chrono::year_month_day date{std::chrono::year{y}, std::chrono::month{m},
                                         std::chrono::day{d}};
  if (!date.ok()) throw FormatError("date '" + std::string(text) + "' does not exist");
  return date;
}

std::string format_date(std::chrono::year_month_day date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

RawReview parse_review_line(std::string_view line, std::size_t line_number) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = split_tabs(line, 5);
  if (fields.size() != 5) {
    throw FormatError(location(line_number) + ": expected 5 tab-separated fields, got " +
                      std::to_string(fields.size()));
  }
  static constexpr const char* kNames[] = {"review_id", "listing_id", "guest_id"};
  for (std::size_t i = 0; i < 3; ++i) {
    if (trim(fields[i]).empty()) {
      throw FormatError(location(line_number) + ": empty " + kNames[i]);
    }
  }
  RawReview review;
  review.review_id = std::string(trim(fields[0]));
  review.listing_id = std::string(trim(fields[1]));
  review.guest_id = std::string(trim(fields[2]));
  try {
    review.date = parse_date(trim(fields[3]));
  } catch (const FormatError& e) {
    throw FormatError(location(line_number) + ": " + e.what());
  }
  review.text = std::string(fields[4]);
  return review;
}

std::vector<RawReview> read_reviews(std::istream& in) {
  std::vector<RawReview> reviews;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty() || line.front() == '#') continue;
    reviews.push_back(parse_review_line(line, line_number));
  }
  return reviews;
}

void write_reviews(std::ostream& out, std::span<const RawReview> reviews) {
  for (const auto& r : reviews) {
    out << r.review_id << '\t' << r.listing_id << '\t' << r.guest_id << '\t'
        << format_date(r.date) << '\t' << single_line(r.text) << '\n';
  }
}

const SegmenterRules& SegmenterRules::defaults() {
  static const SegmenterRules rules{parse_word_list(detail::kAbbreviationsText)};
  return rules;
}

std::vector<std::string> segment_sentences(std::string_view text, const SegmenterRules& rules) {
  std::vector<std::string> sentences;
  auto emit = [&](std::size_t begin, std::size_t end) {
    const std::string_view s = trim(text.substr(begin, end - begin));
    if (!s.empty()) sentences.emplace_back(s);
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && is_terminal(text[end])) ++end;
    const bool single_period = text[i] == '.' && end == i + 1;
    while (end < text.size() && is_closing(text[end])) ++end;

    bool boundary = false;
    if (end == text.size()) {
      boundary = true;
    } else if (is_space(text[end])) {
      std::size_t next = end;
      while (next < text.size() && is_space(text[next])) ++next;
      boundary = next == text.size() || is_upper(text[next]);
    }

    if (boundary && single_period) {
      std::size_t word_begin = i;
      while (word_begin > start && !is_space(text[word_begin - 1])) --word_begin;
      std::string_view word = text.substr(word_begin, i - word_begin);
      while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'')) {
        word.remove_prefix(1);
      }
      const bool initial = word.size() == 1 && is_alpha(word[0]);
      if (initial || rules.abbreviations.contains(lowercase(word))) boundary = false;
    }

    if (boundary) {
      emit(start, end);
      start = end;
    }
    i = end;
  }
  if (start < text.size()) emit(start, text.size());
  return sentences;
}

const WordSet& default_stopwords() {
  static const WordSet words = parse_word_list(detail::kStopwordsText);
  return words;
}

WordSet read_word_list(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_word_list(buffer.str());
}

std::vector<std::string> tokenize_and_filter(std::string_view sentence, const WordSet& stopwords) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !stopwords.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char c : sentence) {
    const auto byte = static_cast<unsigned char>(c);
    if (is_alpha(c) || is_digit(c) || byte >= 0x80) {
      current.push_back(to_lower(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

double ascii_letter_ratio(std::string_view text) {
  std::size_t ascii = 0;
  std::size_t other = 0;
  for (char c : text) {
    const auto byte = static_cast<unsigned char>(c);
    if (is_alpha(c)) {
      ++ascii;
    } else if (byte >= 0xC0) {
      ++other;  // UTF-8 lead byte: one non-ASCII code point
    }
  }
  if (ascii + other == 0) return 1.0;
  return static_cast<double>(ascii) / static_cast<double>(ascii + other);
}

std::uint64_t vocabulary_hash(std::span<const std::string> words) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (const auto& w : words) {
    for (char c : w) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> frequencies,
                       std::size_t max_size)
    : words_(std::move(words)), frequencies_(std::move(frequencies)), max_size_(max_size) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!ids_.emplace(words_[i], static_cast<int>(i)).second) {
      throw FormatError("vocabulary: duplicate word '" + words_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::build(const WordCounts& counts, std::size_t max_size) {
  if (max_size < 1) throw InvalidArgument("build_vocabulary: max_size must be >= 1");
  if (counts.empty()) throw InvalidArgument("build_vocabulary: empty corpus");
  std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);
  std::vector<std::string> words;
  std::vector<std::int64_t> freqs;
  for (auto& [w, f] : ranked) {
    words.push_back(std::move(w));
    freqs.push_back(f);
  }
  return Vocabulary(std::move(words), std::move(freqs), max_size);
}

std::optional<int> Vocabulary::id_of(std::string_view word) const {
  const auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::hash() const { return vocabulary_hash(words_); }

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << '\t' << frequencies_[i] << '\n';
  }
}

Vocabulary Vocabulary::read(std::istream& in, std::size_t max_size) {
  std::vector<std::string> words;
  std::vector<std::int64_t> freqs;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto fields = split_tabs(line, 2);
    if (fields.size() != 2 || fields[0].empty()) {
      throw FormatError("vocabulary line " + std::to_string(line_number) +
                        ": expected 'word TAB frequency'");
    }
    words.emplace_back(fields[0]);
    freqs.push_back(parse_integer<std::int64_t>(
        fields[1], "vocabulary line " + std::to_string(line_number)));
  }
  if (words.empty()) throw FormatError("vocabulary: no entries");
  const std::size_t cap = std::max(max_size, words.size());
  return Vocabulary(std::move(words), std::move(freqs), cap);
}

EncodedCorpus::EncodedCorpus(std::vector<EncodedSentence> sentences)
    : sentences_(std::move(sentences)) {
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    by_listing_[sentences_[i].listing_id].push_back(i);
    by_guest_[sentences_[i].guest_id].push_back(i);
    by_review_[sentences_[i].review_id].push_back(i);
  }
}

std::vector<std::vector<int>> EncodedCorpus::token_lists() const {
  std::vector<std::vector<int>> out;
  out.reserve(sentences_.size());
  for (const auto& s : sentences_) out.push_back(s.token_ids);
  return out;
}

CorpusStats EncodedCorpus::stats() const {
  CorpusStats stats;
  for (const auto& s : sentences_) stats.tokens += s.token_ids.size();
  stats.sentences = sentences_.size();
  stats.guests = by_guest_.size();
  stats.listings = by_listing_.size();
  stats.reviews = by_review_.size();
  return stats;
}

EncodedCorpus EncodedCorpus::subset(std::span<const std::size_t> indexes) const {
  std::vector<EncodedSentence> picked;
  picked.reserve(indexes.size());
  for (std::size_t i : indexes) picked.push_back(sentences_.at(i));
  return EncodedCorpus(std::move(picked));
}

void EncodedCorpus::write(std::ostream& out) const {
  out << "#abae-corpus v1\n";
  for (const auto& s : sentences_) {
    out << s.review_id << '\t' << s.listing_id << '\t' << s.guest_id << '\t'
        << format_date(s.date) << '\t' << s.position << '\t';
    for (std::size_t j = 0; j < s.token_ids.size(); ++j) {
      if (j) out << ' ';
      out << s.token_ids[j];
    }
    out << '\t' << single_line(s.text) << '\n';
  }
}

EncodedCorpus EncodedCorpus::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "#abae-corpus v1") {
    throw FormatError("encoded corpus: missing '#abae-corpus v1' header");
  }
  std::vector<EncodedSentence> sentences;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = "encoded corpus line " + std::to_string(line_number);
    const auto fields = split_tabs(line, 7);
    if (fields.size() != 7) throw FormatError(where + ": expected 7 tab-separated fields");
    EncodedSentence s;
    s.review_id = std::string(fields[0]);
    s.listing_id = std::string(fields[1]);
    s.guest_id = std::string(fields[2]);
    s.date = parse_date(fields[3]);
    s.position = parse_integer<std::size_t>(fields[4], where);
    std::string_view ids = fields[5];
    while (!ids.empty()) {
      const std::size_t space = ids.find(' ');
      const std::string_view tok = ids.substr(0, space);
      if (!tok.empty()) s.token_ids.push_back(parse_integer<int>(tok, where));
      if (space == std::string_view::npos) break;
      ids.remove_prefix(space + 1);
    }
    if (s.token_ids.empty()) throw FormatError(where + ": sentence has no tokens");
    s.text = std::string(fields[6]);
    sentences.push_back(std::move(s));
  }
  return EncodedCorpus(std::move(sentences));
}

std::vector<TokenizedSentence> tokenize_reviews(std::span<const RawReview> reviews,
                                                const PreprocessOptions& options) {
  const WordSet& stopwords = options.stopwords ? *options.stopwords : default_stopwords();
  const SegmenterRules& rules = options.segmenter ? *options.segmenter : SegmenterRules::defaults();
  std::vector<TokenizedSentence> out;
  for (std::size_t r = 0; r < reviews.size(); ++r) {
    const auto sentences = segment_sentences(reviews[r].text, rules);
    for (std::size_t p = 0; p < sentences.size(); ++p) {
      if (options.ascii_filter && ascii_letter_ratio(sentences[p]) < options.min_ascii_ratio) {
        continue;
      }
      auto tokens = tokenize_and_filter(sentences[p], stopwords);
      if (tokens.empty()) continue;
      out.push_back({std::move(tokens), sentences[p], r, p});
    }
  }
  return out;
}

WordCounts count_words(std::span<const TokenizedSentence> sentences) {
  WordCounts counts;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) ++counts[t];
  }
  return counts;
}

namespace {

EncodedCorpus encode_tokenized(std::span<const RawReview> reviews,
                               std::span<const TokenizedSentence> tokenized,
                               const Vocabulary& vocabulary) {
  std::vector<EncodedSentence> sentences;
  for (const auto& t : tokenized) {
    EncodedSentence s;
    for (const auto& token : t.tokens) {
      if (auto id = vocabulary.id_of(token)) s.token_ids.push_back(*id);
    }
    if (s.token_ids.empty()) continue;
    const RawReview& review = reviews[t.review_index];
    s.review_id = review.review_id;
    s.listing_id = review.listing_id;
    s.guest_id = review.guest_id;
    s.date = review.date;
    s.position = t.position;
    s.text = t.text;
    sentences.push_back(std::move(s));
  }
  return EncodedCorpus(std::move(sentences));
}

}  // namespace

EncodedCorpus encode_corpus(std::span<const RawReview> reviews, const Vocabulary& vocabulary,
                            const PreprocessOptions& options) {
  const auto tokenized = tokenize_reviews(reviews, options);
  return encode_tokenized(reviews, tokenized, vocabulary);
}

PreprocessResult preprocess(std::span<const RawReview> reviews, const PreprocessOptions& options) {
  const auto tokenized = tokenize_reviews(reviews, options);
  auto vocabulary = Vocabulary::build(count_words(tokenized), options.max_vocabulary);
  auto corpus = encode_tokenized(reviews, tokenized, vocabulary);
  return {std::move(vocabulary), std::move(corpus)};
}

DatasetSplits split_datasets(const EncodedCorpus& corpus, const SplitRules& rules) {
  if (corpus.empty()) throw InvalidArgument("split_datasets: empty corpus");
  if (rules.min_listing_reviews > rules.max_listing_reviews) {
    throw InvalidArgument("split rule 'listing reviews': min exceeds max");
  }
  Rng rng(rules.seed);

  std::map<std::string, std::set<std::string>> reviews_per_listing;
  for (const auto& s : corpus.sentences()) reviews_per_listing[s.listing_id].insert(s.review_id);

  std::vector<std::string> eligible;
  for (const auto& [listing, idx] : corpus.by_listing()) {
    const std::size_t n_reviews = reviews_per_listing[listing].size();
    if (n_reviews >= rules.min_listing_reviews && n_reviews <= rules.max_listing_reviews &&
        idx.size() >= rules.min_summarize_sentences) {
      eligible.push_back(listing);
    }
  }
  const std::string listing_rule = "split rule 'listing reviews in [" +
                                   std::to_string(rules.min_listing_reviews) + ", " +
                                   std::to_string(rules.max_listing_reviews) + "] with >= " +
                                   std::to_string(rules.min_summarize_sentences) + " sentences'";
  if (eligible.size() < 2) {
    throw InvalidArgument(listing_rule + ": found " + std::to_string(eligible.size()) +
                          " eligible listings, need at least 2 for val and test");
  }
  shuffle(eligible, rng);
  const auto n_eligible = static_cast<double>(eligible.size());
  auto n_test = static_cast<std::size_t>(std::llround(rules.summarize_test_fraction * n_eligible));
  n_test = std::clamp<std::size_t>(n_test, 1, eligible.size() - 1);
  const std::set<std::string> test_listings(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::set<std::string> val_listings(eligible.begin() + static_cast<std::ptrdiff_t>(n_test), eligible.end());

  std::vector<std::string> guests;
  for (const auto& [guest, idx] : corpus.by_guest()) {
    if (idx.size() >= rules.min_guest_sentences) guests.push_back(guest);
  }
  if (guests.size() < rules.rank_val_guests) {
    throw InvalidArgument("split rule 'rank_val guests with >= " +
                          std::to_string(rules.min_guest_sentences) + " sentences': found " +
                          std::to_string(guests.size()) + ", need " +
                          std::to_string(rules.rank_val_guests));
  }
  shuffle(guests, rng);
  guests.resize(rules.rank_val_guests);
  const std::set<std::string> rank_guests(guests.begin(), guests.end());

  std::set<std::string> rank_test_listings;
  for (const auto& listing : test_listings) {
    if (corpus.by_listing().at(listing).size() >= rules.min_rank_test_sentences) {
      rank_test_listings.insert(listing);
    }
  }
  if (rank_test_listings.empty()) {
    throw InvalidArgument("split rule 'rank_test listings with >= " +
                          std::to_string(rules.min_rank_test_sentences) +
                          " sentences': no summarize test listing qualifies");
  }

  std::vector<std::size_t> train, sval, stest, rval, rtest;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus[i];
    const bool in_val = val_listings.contains(s.listing_id);
    const bool in_test = test_listings.contains(s.listing_id);
    const bool by_rank_guest = rank_guests.contains(s.guest_id);
    if (in_val) sval.push_back(i);
    if (in_test) stest.push_back(i);
    if (rank_test_listings.contains(s.listing_id)) rtest.push_back(i);
    if (by_rank_guest) rval.push_back(i);
    if (!in_val && !in_test && !by_rank_guest) {
      if (rules.train_fraction >= 1.0 || uniform_real(rng, 0.0, 1.0) < rules.train_fraction) {
        train.push_back(i);
      }
    }
  }
  if (train.empty()) throw InvalidArgument("split rule 'train': no sentences left for training");
  return {corpus.subset(train), corpus.subset(sval), corpus.subset(stest), corpus.subset(rval),
          corpus.subset(rtest)};
}

}  // namespace abae
