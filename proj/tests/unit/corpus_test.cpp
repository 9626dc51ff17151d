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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "abae/error.hpp"

namespace abae {
namespace {

using Strings = std::vector<std::string>;

TEST(Segmenter, SplitsOnTerminalMarks) {
  EXPECT_EQ(segment_sentences("Great stay. Very clean!"), (Strings{"Great stay.", "Very clean!"}));
  EXPECT_TRUE(segment_sentences("").empty());
  EXPECT_TRUE(segment_sentences("   \n ").empty());
}

TEST(Segmenter, AbbreviationGuard) {
  EXPECT_EQ(segment_sentences("Dr. Kim was kind. Loved it"),
            (Strings{"Dr. Kim was kind.", "Loved it"}));
  EXPECT_EQ(segment_sentences("Walk to St. Mark's Square. Nice."),
            (Strings{"Walk to St. Mark's Square.", "Nice."}));
  EXPECT_EQ(segment_sentences("Met J. Smith there. Good."), (Strings{"Met J. Smith there.", "Good."}));
}

TEST(Segmenter, LowercaseContinuationAndRuns) {
  EXPECT_EQ(segment_sentences("Near the 2.5 mile trail. great"),
            (Strings{"Near the 2.5 mile trail. great"}));
  EXPECT_EQ(segment_sentences("Wow!!! Amazing?! Yes."), (Strings{"Wow!!!", "Amazing?!", "Yes."}));
  EXPECT_EQ(segment_sentences("He said \"Great.\" Then left."),
            (Strings{"He said \"Great.\"", "Then left."}));
}

TEST(Segmenter, KeepsEveryNonSpaceCharacter) {
  const std::string text = "A b. C d! E f? g h. I (j). K";
  std::string joined;
  for (const auto& s : segment_sentences(text)) {
    EXPECT_FALSE(s.empty());
    joined += s;
  }
  std::string compact;
  for (char c : text) {
    if (c != ' ') compact += c;
  }
  joined.erase(std::remove(joined.begin(), joined.end(), ' '), joined.end());
  EXPECT_EQ(joined, compact);
}

TEST(Tokenizer, LowercasesAndDropsStopwords) {
  const auto& stop = default_stopwords();
  EXPECT_EQ(tokenize_and_filter("The room was CLEAN!", stop), (Strings{"room", "clean"}));
  EXPECT_TRUE(tokenize_and_filter("...", stop).empty());
  EXPECT_EQ(tokenize_and_filter("easy to get there from center of city", stop),
            (Strings{"easy", "get", "center", "city"}));
  EXPECT_EQ(tokenize_and_filter("wi-fi, 24h", WordSet{}), (Strings{"wi", "fi", "24h"}));
}

TEST(Tokenizer, AsciiRatio) {
  EXPECT_DOUBLE_EQ(ascii_letter_ratio("abc"), 1.0);
  EXPECT_DOUBLE_EQ(ascii_letter_ratio("..."), 1.0);
  EXPECT_LT(ascii_letter_ratio("\xd0\xbf\xd1\x80\xd0\xb8 ok"), 0.5);
}

TEST(Vocabulary, FrequencyOrderWithLexicographicTies) {
  auto v = Vocabulary::build({{"a", 3}, {"b", 2}, {"c", 1}}, 2);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(*v.id_of("a"), 0);
  EXPECT_EQ(*v.id_of("b"), 1);
  EXPECT_FALSE(v.id_of("c").has_value());

  auto t = Vocabulary::build({{"b", 1}, {"a", 1}}, 1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.word(0), "a");

  auto all = Vocabulary::build({{"x", 5}, {"y", 5}, {"z", 9}}, 100);
  EXPECT_EQ(all.size(), 3u);
  EXPECT_EQ(all.word(0), "z");
  EXPECT_EQ(all.word(1), "x");
}

TEST(Vocabulary, EmptyCorpusAndBadCap) {
  try {
    Vocabulary::build({}, 10);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("empty corpus"), std::string::npos);
  }
  EXPECT_THROW(Vocabulary::build({{"a", 1}}, 0), InvalidArgument);
}

TEST(Vocabulary, RoundTripAndHash) {
  auto v = Vocabulary::build({{"clean", 7}, {"host", 4}, {"walk", 4}}, 9000);
  std::stringstream ss;
  v.write(ss);
  EXPECT_EQ(ss.str(), "clean\t7\nhost\t4\nwalk\t4\n");
  auto back = Vocabulary::read(ss);
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.hash(), v.hash());
  auto other = Vocabulary::build({{"clean", 7}, {"walk", 5}, {"host", 4}}, 9000);
  EXPECT_NE(other.hash(), v.hash());
}

RawReview review(std::string id, std::string listing, std::string guest, std::string text) {
  return {std::move(id), std::move(listing), std::move(guest), parse_date("2019-05-01"),
          std::move(text)};
}

TEST(ReviewFile, ParseAndRoundTrip) {
  const auto r = parse_review_line("r1\tL1\tg1\t2019-02-03\tNice place.\tTabs kept");
  EXPECT_EQ(r.review_id, "r1");
  EXPECT_EQ(r.text, "Nice place.\tTabs kept");
  EXPECT_EQ(format_date(r.date), "2019-02-03");
  EXPECT_THROW(parse_review_line("r1\tL1\tg1\t2019-02-30\tx"), FormatError);
  EXPECT_THROW(parse_review_line("r1\tL1\t\t2019-02-03\tx"), FormatError);
  EXPECT_THROW(parse_review_line("r1\tL1\tg1"), FormatError);

  std::vector<RawReview> reviews = {review("a", "L", "g", "Clean room."),
                                    review("b", "L", "h", "")};
  std::stringstream ss;
  write_reviews(ss, reviews);
  const auto back = read_reviews(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].text, "Clean room.");
  EXPECT_EQ(back[1].review_id, "b");
}

TEST(Encode, DropsUnknownWordsAndEmptySentences) {
  std::vector<RawReview> reviews = {review("r1", "L1", "g1", "Clean room. The of. Great host!")};
  const auto vocab = Vocabulary::build({{"clean", 2}, {"room", 1}, {"host", 1}}, 10);
  const auto corpus = encode_corpus(reviews, vocab);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].token_ids, (std::vector<int>{0, 2}));
  EXPECT_EQ(corpus[1].token_ids, (std::vector<int>{1}));
  EXPECT_EQ(corpus[0].position, 0u);
  EXPECT_EQ(corpus[1].position, 2u);
  EXPECT_EQ(corpus[1].text, "Great host!");
  // Decoding the ids gives back the in-vocabulary tokens.
  Strings decoded;
  for (int id : corpus[0].token_ids) decoded.push_back(vocab.word(id));
  EXPECT_EQ(decoded, (Strings{"clean", "room"}));
}

TEST(Encode, PreprocessIsDeterministic) {
  std::vector<RawReview> reviews = {review("r1", "L1", "g1", "Clean room. Great host!"),
                                    review("r2", "L2", "g2", "Host was great. Room clean.")};
  const auto a = preprocess(reviews);
  const auto b = preprocess(reviews);
  std::stringstream va, vb, ca, cb;
  a.vocabulary.write(va);
  b.vocabulary.write(vb);
  a.corpus.write(ca);
  b.corpus.write(cb);
  EXPECT_EQ(va.str(), vb.str());
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(a.corpus.stats().sentences, 4u);
  EXPECT_EQ(a.corpus.stats().reviews, 2u);
}

TEST(EncodedCorpus, IndexesPartitionAndRoundTrip) {
  std::vector<EncodedSentence> s = {
      {{0, 1}, "r1", "L1", "g1", parse_date("2020-01-01"), 0, "a b"},
      {{2}, "r1", "L1", "g1", parse_date("2020-01-01"), 1, "c"},
      {{1}, "r2", "L2", "g1", parse_date("2020-02-01"), 0, "b"},
  };
  EncodedCorpus corpus(s);
  std::size_t total = 0;
  for (const auto& [id, idx] : corpus.by_listing()) total += idx.size();
  EXPECT_EQ(total, 3u);
  EXPECT_EQ(corpus.by_guest().at("g1").size(), 3u);
  EXPECT_EQ(corpus.by_review().at("r1"), (std::vector<std::size_t>{0, 1}));

  std::stringstream ss;
  corpus.write(ss);
  const auto back = EncodedCorpus::read(ss);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].token_ids, corpus[0].token_ids);
  EXPECT_EQ(back[2].guest_id, "g1");
  EXPECT_EQ(back[1].position, 1u);
  std::stringstream again;
  back.write(again);
  EXPECT_EQ(again.str(), ss.str());

  std::stringstream bad("#abae-corpus v1\nr1\tL1\tg1\t2020-01-01\t0\t1 x\ttext\n");
  EXPECT_THROW(EncodedCorpus::read(bad), FormatError);
}

// Listing i gets reviews_per_listing[i] reviews with two sentences each;
// guest ids cycle so that each guest writes several reviews.
EncodedCorpus make_corpus(const std::vector<std::size_t>& reviews_per_listing, std::size_t guests) {
  std::vector<EncodedSentence> s;
  std::size_t review = 0;
  for (std::size_t l = 0; l < reviews_per_listing.size(); ++l) {
    for (std::size_t r = 0; r < reviews_per_listing[l]; ++r, ++review) {
      for (std::size_t p = 0; p < 2; ++p) {
        s.push_back({{static_cast<int>(p)}, "r" + std::to_string(review), "L" + std::to_string(l),
                     "g" + std::to_string(review % guests), parse_date("2020-01-01"), p, "x"});
      }
    }
  }
  return EncodedCorpus(std::move(s));
}

std::set<std::string> listings_of(const EncodedCorpus& c) {
  std::set<std::string> out;
  for (const auto& [id, idx] : c.by_listing()) out.insert(id);
  return out;
}

std::set<std::string> guests_of(const EncodedCorpus& c) {
  std::set<std::string> out;
  for (const auto& [id, idx] : c.by_guest()) out.insert(id);
  return out;
}

TEST(Split, DisjointnessAndThresholds) {
  // Listings 0..9 have 60 reviews (eligible), 10..29 have 20.
  std::vector<std::size_t> sizes(30, 20);
  for (std::size_t i = 0; i < 10; ++i) sizes[i] = 60;
  const auto corpus = make_corpus(sizes, 97);
  SplitRules rules;
  rules.rank_val_guests = 5;
  const auto splits = split_datasets(corpus, rules);

  const auto train_listings = listings_of(splits.train);
  for (const auto* part : {&splits.summarize_val, &splits.summarize_test}) {
    for (const auto& l : listings_of(*part)) {
      EXPECT_FALSE(train_listings.contains(l)) << l;
      const int n = std::stoi(l.substr(1));
      EXPECT_LT(n, 10);
    }
  }
  EXPECT_EQ(listings_of(splits.summarize_val).size() + listings_of(splits.summarize_test).size(), 10u);
  const auto train_guests = guests_of(splits.train);
  const auto rank_guests = guests_of(splits.rank_val);
  EXPECT_EQ(rank_guests.size(), 5u);
  for (const auto& g : rank_guests) {
    EXPECT_FALSE(train_guests.contains(g)) << g;
    EXPECT_GE(splits.rank_val.by_guest().at(g).size(), rules.min_guest_sentences);
  }
  for (const auto& [l, idx] : splits.rank_test.by_listing()) {
    EXPECT_GE(idx.size(), rules.min_rank_test_sentences);
  }
  EXPECT_FALSE(splits.train.empty());
}

std::string split_error(const EncodedCorpus& corpus, const SplitRules& rules) {
  try {
    split_datasets(corpus, rules);
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return "";
}

TEST(Split, ViolatedRulesAreNamed) {
  // One guest per review: every guest has 2 sentences, fewer than 10.
  const auto corpus = make_corpus({60, 60, 20}, 1000000);
  SplitRules rules;
  rules.rank_val_guests = 1;
  EXPECT_NE(split_error(corpus, rules).find("rank_val guests with >= 10"), std::string::npos);

  rules.min_guest_sentences = 2;
  rules.min_rank_test_sentences = 200;
  EXPECT_NE(split_error(corpus, rules).find("rank_test listings with >= 200"), std::string::npos);

  rules.min_rank_test_sentences = 120;
  const auto splits = split_datasets(corpus, rules);
  EXPECT_EQ(listings_of(splits.rank_test).size(), 1u);
  EXPECT_EQ(splits.rank_test.size(), 120u);

  const auto small = make_corpus({20, 20}, 3);
  EXPECT_NE(split_error(small, SplitRules{}).find("listing reviews in [50, 100]"), std::string::npos);
}

TEST(Split, RankTestSentenceMinimum) {
  // Listing sizes in reviews; each review has two sentences.
  std::vector<std::size_t> sizes = {60, 60, 60, 60, 20, 20, 20};
  auto corpus = make_corpus(sizes, 13);
  SplitRules rules;
  rules.rank_val_guests = 2;
  rules.summarize_test_fraction = 0.5;
  rules.min_rank_test_sentences = 121;  // every listing has 120
  EXPECT_NE(split_error(corpus, rules).find("rank_test"), std::string::npos);
  rules.min_rank_test_sentences = 120;
  EXPECT_EQ(listings_of(split_datasets(corpus, rules).rank_test).size(), 2u);
}

}  // namespace
}  // namespace abae
