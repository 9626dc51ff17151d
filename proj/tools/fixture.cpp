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

// Fixture helper for the planted-topic corpus: generates review files and
// stands in for the human steps of the pipeline (cluster labeling and
// sentence judgments) using the planted ground truth.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "abae/aspects.hpp"
#include "abae/corpus.hpp"
#include "abae/error.hpp"
#include "abae/numerics.hpp"
#include "abae/summarize.hpp"
#include "abae/synthetic.hpp"

namespace fs = std::filesystem;
using namespace abae;

namespace {

// Planted topics named like a target label map to it; the rest are "other".
AspectLabel label_of_topic(const std::string& topic) {
  for (AspectLabel l : kTargetLabels) {
    if (to_string(l) == topic) return l;
  }
  return AspectLabel::other;
}

std::map<std::string, std::size_t> all_topic_words() {
  std::map<std::string, std::size_t> topic_of;
  const auto& topics = synthetic::planted_topics();
  for (std::size_t t = 0; t < topics.size(); ++t) {
    for (const auto& w : topics[t].words) topic_of[w] = t;
  }
  return topic_of;
}

int write_labels(const fs::path& workdir, const std::vector<std::string>& methods,
                 std::size_t depth) {
  const auto topic_of = all_topic_words();
  const auto& topics = synthetic::planted_topics();
  fs::create_directories(workdir / "labels");
  for (const auto& m : methods) {
    std::ifstream in(workdir / ("top_words_" + m + ".tsv"));
    if (!in) {
      std::cerr << "abae_fixture: missing " << (workdir / ("top_words_" + m + ".tsv")).string()
                << " (run 'abae coherence' first)\n";
      return 3;
    }
    std::map<std::size_t, std::vector<std::string>> words;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::size_t aspect = 0, rank = 0;
      std::string word;
      ss >> aspect >> rank >> word;
      if (rank <= depth) words[aspect].push_back(word);
    }
    std::ofstream out(workdir / "labels" / (m + ".tsv"));
    for (const auto& [aspect, list] : words) {
      AspectLabel label = AspectLabel::other;
      try {
        label = label_of_topic(topics[synthetic::majority_topic(list, topic_of)].name);
      } catch (const InvalidArgument&) {
      }
      out << aspect << '\t' << to_string(label) << '\n';
    }
  }
  return 0;
}

int judge(const fs::path& workdir, double flip_rate, std::uint64_t seed) {
  const auto topic_of = all_topic_words();
  const auto& topics = synthetic::planted_topics();
  std::vector<fs::path> sheets;
  for (const auto& entry : fs::directory_iterator(workdir / "sheets")) {
    if (entry.path().filename().string().rfind("annotator_", 0) == 0) sheets.push_back(entry.path());
  }
  std::sort(sheets.begin(), sheets.end());
  if (sheets.empty()) {
    std::cerr << "abae_fixture: no sheets under " << (workdir / "sheets").string() << '\n';
    return 3;
  }
  fs::create_directories(workdir / "judged");
  for (std::size_t a = 0; a < sheets.size(); ++a) {
    std::ifstream in(sheets[a]);
    auto rows = read_sheet(in);
    Rng rng(seed + a);
    for (auto& row : rows) {
      int verdict = 0;
      try {
        const auto tokens = tokenize_and_filter(row.sentence, default_stopwords());
        const auto topic = synthetic::majority_topic(tokens, topic_of);
        verdict = label_of_topic(topics[topic].name) == row.aspect ? 1 : 0;
      } catch (const InvalidArgument&) {
      }
      if (uniform_real(rng, 0.0, 1.0) < flip_rate) verdict = 1 - verdict;
      row.verdict = verdict;
    }
    std::ofstream out(workdir / "judged" / sheets[a].filename());
    write_sheet(out, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planted-topic fixtures for the abae pipeline", "abae_fixture"};
  app.require_subcommand(1);

  synthetic::CorpusOptions options;
  options.listings = 30;
  options.guests = 150;
  options.seed = 7;
  std::string out_path;
  auto* corpus = app.add_subcommand("corpus", "Write a planted-topic review file");
  corpus->add_option("--out", out_path, "Output review file")->required();
  corpus->add_option("--topics", options.topics)->capture_default_str();
  corpus->add_option("--listings", options.listings)->capture_default_str();
  corpus->add_option("--min-reviews", options.min_reviews, "Reviews per listing, lower bound")->capture_default_str();
  corpus->add_option("--max-reviews", options.max_reviews, "Reviews per listing, upper bound")->capture_default_str();
  corpus->add_option("--guests", options.guests)->capture_default_str();
  corpus->add_option("--min-sentences", options.min_sentences)->capture_default_str();
  corpus->add_option("--max-sentences", options.max_sentences)->capture_default_str();
  corpus->add_option("--seed", options.seed)->capture_default_str();

  std::string workdir = "run";
  std::vector<std::string> methods = {"kmeans", "lda", "abae"};
  std::size_t depth = 10;
  auto* label = app.add_subcommand("label", "Label clusters by the majority planted topic of their top words");
  label->add_option("--workdir", workdir)->capture_default_str();
  label->add_option("--methods", methods)->delimiter(',')->capture_default_str();
  label->add_option("--depth", depth, "Top words consulted per cluster")->capture_default_str();

  double flip_rate = 0.05;
  std::uint64_t judge_seed = 1;
  auto* judged = app.add_subcommand("judge", "Fill annotator sheets from the planted topics into <workdir>/judged");
  judged->add_option("--workdir", workdir)->capture_default_str();
  judged->add_option("--flip-rate", flip_rate, "Chance an annotator flips a verdict")->capture_default_str();
  judged->add_option("--seed", judge_seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*corpus) {
      const auto planted = synthetic::generate_corpus(options);
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "abae_fixture: cannot write " << out_path << '\n';
        return 4;
      }
      write_reviews(out, planted.reviews);
      return 0;
    }
    if (*label) return write_labels(workdir, methods, depth);
    return judge(workdir, flip_rate, judge_seed);
  } catch (const std::exception& e) {
    std::cerr << "abae_fixture: " << e.what() << '\n';
    return 4;
  }
}
