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

#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "abae/corpus.hpp"
#include "abae/synthetic.hpp"

namespace abae::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("abae_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::vector<std::string> base(const std::string& command) const {
    return {command, "--config", std::string(ABAE_SOURCE_DIR) + "/config/fixture.toml", "--workdir",
            (dir_ / "run").string(), "--threads", "1"};
  }

  fs::path write_fixture() const {
    synthetic::CorpusOptions options;
    options.listings = 30;
    options.guests = 150;
    options.seed = 7;
    const fs::path path = dir_ / "fixture.tsv";
    std::ofstream out(path);
    write_reviews(out, synthetic::generate_corpus(options).reviews);
    return path;
  }

  fs::path dir_;
};

TEST_F(Cli, UnknownCommandExitsOne) {
  const auto r = invoke({"train-everything"});
  EXPECT_EQ(r.code, kUnknownCommand);
  EXPECT_NE(r.err.find("unknown command"), std::string::npos);
}

TEST_F(Cli, HelpListsEveryCommand) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const auto& c : kCommands) EXPECT_NE(r.out.find(c), std::string::npos) << c;
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  auto args = base("fit-kmeans");
  args.insert(args.end(), {"--aspects", "1"});
  EXPECT_EQ(invoke(args).code, kConfigError);
  args = base("fit-kmeans");
  args.insert(args.end(), {"--learning-rate", "fast"});
  EXPECT_EQ(invoke(args).code, kConfigError);
  const fs::path bad = dir_ / "bad.toml";
  std::ofstream(bad) << "not-an-option = 3\n";
  EXPECT_EQ(invoke({"preprocess", "--config", bad.string()}).code, kConfigError);
}

TEST_F(Cli, MissingInputNamesProducer) {
  const auto r = invoke(base("train-abae"));
  EXPECT_EQ(r.code, kMissingInput);
  EXPECT_NE(r.err.find("train-embeddings"), std::string::npos) << r.err;
  auto args = base("preprocess");
  args.insert(args.end(), {"--input", (dir_ / "absent.tsv").string()});
  EXPECT_EQ(invoke(args).code, kMissingInput);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST_F(Cli, RerankPipelineProducesAllGuestPairs) {
  const auto input = write_fixture();
  auto pre = base("preprocess");
  pre.insert(pre.end(), {"--input", input.string()});
  ASSERT_EQ(invoke(pre).code, 0);
  for (const char* command : {"train-embeddings", "fit-kmeans", "train-abae", "profile", "rerank-eval"}) {
    auto args = base(command);
    args.insert(args.end(), {"--methods", "abae"});
    const auto r = invoke(args);
    ASSERT_EQ(r.code, 0) << command << ": " << r.err;
  }
  const fs::path run = dir_ / "run";
  std::ifstream scatter(run / "scatter_abae.tsv");
  std::string line;
  std::size_t rows = 0;
  std::getline(scatter, line);
  EXPECT_EQ(line, "guest_a\tguest_b\tx_kl\ty_tau\tkind\tmethod");
  while (std::getline(scatter, line)) ++rows;
  EXPECT_EQ(rows, 3u * 190u);
  EXPECT_TRUE(fs::exists(run / "manifests" / "rerank-eval.json"));
  EXPECT_NE(slurp(run / "r2_abae.tsv").find("sentence"), std::string::npos);

  // Rerunning a stage with the same inputs rewrites identical bytes.
  const std::string before = slurp(run / "r2_abae.tsv");
  auto again = base("rerank-eval");
  again.insert(again.end(), {"--methods", "abae"});
  ASSERT_EQ(invoke(again).code, 0);
  EXPECT_EQ(slurp(run / "r2_abae.tsv"), before);

  const auto report = invoke(base("report"));
  EXPECT_EQ(report.code, kMissingInput);
}

}  // namespace
}  // namespace abae::cli
