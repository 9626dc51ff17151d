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

#include "abae/kmeans.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <sstream>

#include "abae/error.hpp"

namespace abae {
namespace {

Matrix column(std::vector<double> xs) {
  const std::size_t n = xs.size();
  return Matrix(n, 1, std::move(xs));
}

// Minimum within-cluster SSE over all 2-partitions of a 1-D point set.
std::pair<double, double> brute_force_two_means(const std::vector<double>& xs) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> centers;
  const std::size_t n = xs.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    double s[2] = {0, 0};
    double c[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int side = (mask >> i) & 1;
      s[side] += xs[i];
      c[side] += 1;
    }
    const double m0 = s[0] / c[0];
    const double m1 = s[1] / c[1];
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = ((mask >> i) & 1) ? m1 : m0;
      sse += (xs[i] - m) * (xs[i] - m);
    }
    if (sse < best) {
      best = sse;
      centers = {std::min(m0, m1), std::max(m0, m1)};
    }
  }
  return centers;
}

TEST(KMeans, FourPointInstanceMatchesBruteForce) {
  const std::vector<double> xs = {0, 1, 10, 11};
  const auto expected = brute_force_two_means(xs);
  EXPECT_DOUBLE_EQ(expected.first, 0.5);
  EXPECT_DOUBLE_EQ(expected.second, 10.5);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    KMeansOptions options;
    options.clusters = 2;
    options.seed = seed;
    const auto model = kmeans_fit(column(xs), options);
    std::vector<double> c = {model.centroids(0, 0), model.centroids(1, 0)};
    std::sort(c.begin(), c.end());
    EXPECT_DOUBLE_EQ(c[0], expected.first);
    EXPECT_DOUBLE_EQ(c[1], expected.second);
  }
}

TEST(KMeans, KEqualsPointCountGivesZeroInertia) {
  const Matrix points(3, 2, std::vector<double>{0, 0, 5, 1, -2, 7});
  KMeansOptions options;
  options.clusters = 3;
  const auto model = kmeans_fit(points, options);
  EXPECT_DOUBLE_EQ(kmeans_inertia(model, points), 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(kmeans_assign(model, points.row(i)).distance, 0.0);
}

TEST(KMeans, SingleClusterIsTheMean) {
  const Matrix points(4, 2, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  KMeansOptions options;
  options.clusters = 1;
  const auto model = kmeans_fit(points, options);
  EXPECT_DOUBLE_EQ(model.centroids(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(model.centroids(0, 1), 5.0);
}

TEST(KMeans, InertiaNonIncreasingAndDeterministic) {
  Rng rng(3);
  Matrix points(300, 4);
  for (double& x : points.values()) x = uniform_real(rng, -1, 1);
  KMeansOptions options;
  options.clusters = 8;
  options.seed = 9;
  const auto model = kmeans_fit(points, options);
  ASSERT_GE(model.inertia_history.size(), 2u);
  for (std::size_t i = 1; i < model.inertia_history.size(); ++i) {
    EXPECT_LE(model.inertia_history[i], model.inertia_history[i - 1] + 1e-9);
  }
  EXPECT_EQ(kmeans_fit(points, options).centroids, model.centroids);
}

TEST(KMeans, AssignTiesAndErrors) {
  KMeansModel model;
  model.centroids = Matrix(2, 1, std::vector<double>{-1, 1});
  const std::vector<double> mid = {0.0};
  EXPECT_EQ(kmeans_assign(model, mid).cluster, 0u);
  EXPECT_NEAR(kmeans_assign(model, std::vector<double>{0.9}).distance, 0.1, 1e-15);
  EXPECT_THROW(kmeans_assign(model, std::vector<double>{0.0, 1.0}), InvalidArgument);
  KMeansOptions options;
  options.clusters = 3;
  EXPECT_THROW(kmeans_fit(column({1, 2}), options), InvalidArgument);
}

TEST(KMeans, TextRoundTripIsExact) {
  KMeansModel model;
  model.centroids = Matrix(2, 3, std::vector<double>{0.1, -1e-17, 3.0, 1.0 / 3.0, 2e300, -0.0});
  std::stringstream s;
  write_kmeans(s, model);
  const auto back = read_kmeans(s);
  EXPECT_EQ(back.centroids, model.centroids);
  std::stringstream bad("2 3\n1 2 3\n");
  EXPECT_THROW(read_kmeans(bad), FormatError);
}

}  // namespace
}  // namespace abae
