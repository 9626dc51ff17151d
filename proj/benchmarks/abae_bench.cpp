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

#include <benchmark/benchmark.h>

#include <numeric>
#include <string>
#include <vector>

#include "abae/abae.hpp"
#include "abae/embeddings.hpp"
#include "abae/kmeans.hpp"
#include "abae/lda.hpp"
#include "abae/profiles.hpp"

namespace {

using namespace abae;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = uniform_real(rng, -scale, scale);
  return m;
}

std::vector<std::vector<int>> random_sentences(std::size_t n, std::size_t vocab, Rng& rng) {
  std::vector<std::vector<int>> out(n);
  for (auto& s : out) {
    s.resize(3 + uniform_index(rng, 10));
    for (int& w : s) w = static_cast<int>(uniform_index(rng, vocab));
  }
  return out;
}

// One mini-batch of the full objective and its gradient; arg is d.
void BM_AbaeBackward(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  AbaeConfig config;
  AbaeModel m;
  m.embeddings = random_matrix(2000, d, rng);
  m.attention = Matrix::identity(d);
  m.classifier = random_matrix(config.aspects, d, rng, 0.05);
  m.bias.assign(config.aspects, 0.0);
  m.aspects = random_matrix(config.aspects, d, rng);
  const auto sentences = random_sentences(config.batch_size * (config.negatives + 1), 2000, rng);
  std::vector<TrainingExample> batch;
  for (std::size_t i = 0; i < config.batch_size; ++i) {
    TrainingExample ex{sentences[i], {}};
    for (std::size_t n = 0; n < config.negatives; ++n) {
      ex.negatives.emplace_back(sentences[config.batch_size + i * config.negatives + n]);
    }
    batch.push_back(std::move(ex));
  }
  for (auto _ : state) benchmark::DoNotOptimize(abae_backward(batch, m, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(config.batch_size));
}
BENCHMARK(BM_AbaeBackward)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SgnsStep(benchmark::State& state) {
  Rng rng(2);
  EmbeddingTable table;
  table.words.resize(9000);
  table.input = random_matrix(9000, 200, rng, 0.01);
  table.output = random_matrix(9000, 200, rng, 0.01);
  std::vector<int> negatives(5);
  for (auto _ : state) {
    const int center = static_cast<int>(uniform_index(rng, 9000));
    const int context = static_cast<int>(uniform_index(rng, 9000));
    for (int& n : negatives) n = static_cast<int>(uniform_index(rng, 9000));
    benchmark::DoNotOptimize(sgns_train_step(center, context, negatives, table, 0.025));
  }
}
BENCHMARK(BM_SgnsStep);

void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<std::string> a;
  for (std::size_t i = 0; i < n; ++i) a.push_back("object" + std::to_string(i));
  auto b = a;
  shuffle(b, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau(a, b));
}
BENCHMARK(BM_KendallTau)->Arg(50)->Arg(1000);

void BM_KMeansFit(benchmark::State& state) {
  Rng rng(4);
  const Matrix points = random_matrix(9000, 200, rng);
  KMeansOptions options;
  options.max_iterations = 5;
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_fit(points, options));
}
BENCHMARK(BM_KMeansFit)->Unit(benchmark::kMillisecond);

void BM_LdaSweep(benchmark::State& state) {
  Rng rng(5);
  LdaOptions options;
  LdaSampler sampler(random_sentences(10000, 9000, rng), 9000, options);
  for (auto _ : state) sampler.sweep();
}
BENCHMARK(BM_LdaSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
