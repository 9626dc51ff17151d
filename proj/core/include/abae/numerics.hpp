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
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace abae {

using Vector = std::vector<double>;
using Rng = std::mt19937_64;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  void fill(double value);
  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> v);
double euclidean_distance(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

// m * x and m^T * x.
Vector matvec(const Matrix& m, std::span<const double> x);
Vector matvec_transposed(const Matrix& m, std::span<const double> x);

// Numerically stable softmax (max-subtracted). Throws on empty input.
Vector softmax(std::span<const double> logits);

// u.v / (|u| |v|), clamped to [-1, 1]. Throws "zero-norm input" when either
// vector is all zeros.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

double sigmoid(double x);

// Returns v / |v|; throws on a zero vector.
Vector normalized(std::span<const double> v);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction over a fixed list of parameter tensors. The
// tensor sizes are fixed at construction and checked on every step.
class AdamState {
 public:
  AdamState(AdamConfig config, std::vector<std::size_t> tensor_sizes);

  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  std::span<const double> first_moment(std::size_t tensor) const { return m_[tensor]; }
  std::span<const double> second_moment(std::size_t tensor) const { return v_[tensor]; }

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t step_ = 0;
};

struct GradientCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Number of distinct coordinates to probe; 0 checks every coordinate.
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  // Lower bound on the error denominator; 1 makes the error absolute for
  // small gradients.
  double denominator_floor = 1.0;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool passed = true;
};

// Compares `analytic` against central differences of `loss` with respect to
// `params`. Each probed coordinate is perturbed in place and restored. The
// error per coordinate is |g - g_num| / max(floor, |g|, |g_num|).
GradientCheckReport finite_difference_check(const std::function<double()>& loss,
                                             std::span<double> params,
                                             std::span<const double> analytic,
                                             const GradientCheckOptions& options = {});

// Merges two reports, keeping the worst coordinate.
GradientCheckReport merge(const GradientCheckReport& a, const GradientCheckReport& b);

// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);
// Uniform real in [lo, hi).
double uniform_real(Rng& rng, double lo, double hi);

// Fisher-Yates shuffle driven by uniform_index, so results depend only on
// the generator and not on the standard library.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace abae
