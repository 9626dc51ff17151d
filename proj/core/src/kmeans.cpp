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

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "abae/error.hpp"

namespace abae {

namespace {

std::vector<std::size_t> assign_all(const Matrix& centroids, const Matrix& points,
                                    double* inertia) {
  std::vector<std::size_t> labels(points.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centroids.rows(); ++k) {
      const double d = squared_distance(points.row(i), centroids.row(k));
      if (d < best) {
        best = d;
        labels[i] = k;
      }
    }
    total += best;
  }
  if (inertia) *inertia = total;
  return labels;
}

Matrix plus_plus_seeds(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::size_t first = uniform_index(rng, n);
  std::copy(points.row(first).begin(), points.row(first).end(), centroids.row(0).begin());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centroids.row(c - 1)));
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = uniform_real(rng, 0.0, total);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (target < nearest[i]) {
          pick = i;
          break;
        }
        target -= nearest[i];
      }
    } else {
      pick = uniform_index(rng, n);
    }
    std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
  }
  return centroids;
}

}  // namespace

KMeansModel kmeans_fit(const Matrix& points, const KMeansOptions& options) {
  const std::size_t k = options.clusters;
  if (k < 1) throw InvalidArgument("kmeans_fit: K must be >= 1");
  if (points.rows() < k) {
    throw InvalidArgument("kmeans_fit: " + std::to_string(points.rows()) +
                          " points is fewer than K = " + std::to_string(k));
  }
  Rng rng(options.seed);
  KMeansModel model;
  model.centroids = plus_plus_seeds(points, k, rng);
  const std::size_t d = points.cols();

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    double inertia = 0.0;
    const auto labels = assign_all(model.centroids, points, &inertia);
    model.inertia_history.push_back(inertia);

    Matrix sums(k, d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      axpy(1.0, points.row(i), sums.row(labels[i]));
      ++counts[labels[i]];
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      Vector next(d);
      if (counts[c] == 0) {
        std::size_t far = 0;
        double far_dist = -1.0;
        for (std::size_t i = 0; i < points.rows(); ++i) {
          const double dist = squared_distance(points.row(i), model.centroids.row(labels[i]));
          if (dist > far_dist) {
            far_dist = dist;
            far = i;
          }
        }
        next.assign(points.row(far).begin(), points.row(far).end());
      } else {
        for (std::size_t j = 0; j < d; ++j) {
          next[j] = sums(c, j) / static_cast<double>(counts[c]);
        }
      }
      max_shift = std::max(max_shift, euclidean_distance(next, model.centroids.row(c)));
      std::copy(next.begin(), next.end(), model.centroids.row(c).begin());
    }
    if (max_shift < options.tolerance) break;
  }
  double final_inertia = 0.0;
  assign_all(model.centroids, points, &final_inertia);
  model.inertia_history.push_back(final_inertia);
  return model;
}

ClusterAssignment kmeans_assign(const KMeansModel& model, std::span<const double> point) {
  if (point.size() != model.dimension()) {
    throw InvalidArgument("kmeans_assign: point dimension " + std::to_string(point.size()) +
                          " does not match centroid dimension " +
                          std::to_string(model.dimension()));
  }
  ClusterAssignment best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < model.clusters(); ++k) {
    const double d = squared_distance(point, model.centroids.row(k));
    if (d < best.distance) best = {k, d};
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

double kmeans_inertia(const KMeansModel& model, const Matrix& points) {
  double inertia = 0.0;
  assign_all(model.centroids, points, &inertia);
  return inertia;
}

void write_kmeans(std::ostream& out, const KMeansModel& model) {
  out << model.clusters() << ' ' << model.dimension() << '\n';
  char buf[32];
  for (std::size_t k = 0; k < model.clusters(); ++k) {
    const auto row = model.centroids.row(k);
    for (std::size_t j = 0; j < row.size(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[j]);
      if (j) out << ' ';
      out << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

KMeansModel read_kmeans(std::istream& in) {
  std::size_t k = 0, d = 0;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("kmeans: missing header");
  {
    std::istringstream header(line);
    if (!(header >> k >> d) || k == 0 || d == 0) throw FormatError("kmeans: header must be 'K d'");
  }
  KMeansModel model;
  model.centroids = Matrix(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    if (!std::getline(in, line)) throw FormatError("kmeans: missing centroid " + std::to_string(c));
    std::string_view rest = line;
    for (std::size_t j = 0; j < d; ++j) {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
      if (ec != std::errc()) {
        throw FormatError("kmeans: centroid " + std::to_string(c) + " has fewer than " +
                          std::to_string(d) + " values");
      }
      model.centroids(c, j) = value;
      rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    }
  }
  return model;
}

}  // namespace abae
