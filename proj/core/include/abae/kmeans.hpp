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
#include <span>
#include <vector>

#include "abae/numerics.hpp"

namespace abae {

struct KMeansOptions {
  std::size_t clusters = 30;
  std::uint64_t seed = 1;
  std::size_t max_iterations = 300;
  // Stop once no centroid moves farther than this (Euclidean).
  double tolerance = 1e-6;
};

struct KMeansModel {
  Matrix centroids;                   // K x d
  std::vector<double> inertia_history;  // sum of squared distances after each assignment step

  std::size_t clusters() const { return centroids.rows(); }
  std::size_t dimension() const { return centroids.cols(); }
};

// k-means++ seeding followed by Lloyd iterations. A cluster that empties is
// re-seeded with the point farthest from its current centroid.
KMeansModel kmeans_fit(const Matrix& points, const KMeansOptions& options);

struct ClusterAssignment {
  std::size_t cluster = 0;
  double distance = 0.0;
};

// Nearest centroid by Euclidean distance; ties go to the lowest id.
ClusterAssignment kmeans_assign(const KMeansModel& model, std::span<const double> point);

double kmeans_inertia(const KMeansModel& model, const Matrix& points);

// "K d" header, then one centroid per line in shortest round-trip form.
void write_kmeans(std::ostream& out, const KMeansModel& model);
KMeansModel read_kmeans(std::istream& in);

}  // namespace abae
