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

#include "abae/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "abae/error.hpp"

namespace abae {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": size mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw InvalidArgument("Matrix: " + std::to_string(values_.size()) +
                          " values for a " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " matrix");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool Matrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> v) {
  for (double& x : v) x *= alpha;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

Vector matvec(const Matrix& m, std::span<const double> x) {
  require_same_size(m.cols(), x.size(), "matvec");
  Vector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), x);
  return out;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> x) {
  require_same_size(m.rows(), x.size(), "matvec_transposed");
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) axpy(x[r], m.row(r), out);
  return out;
}

Vector softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidArgument("softmax: empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw InvalidArgument("cosine_similarity: zero-norm input");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector normalized(std::span<const double> v) {
  const double n = norm(v);
  if (n == 0.0) throw InvalidArgument("normalized: zero-norm input");
  Vector out(v.begin(), v.end());
  scale(1.0 / n, out);
  return out;
}

AdamState::AdamState(AdamConfig config, std::vector<std::size_t> tensor_sizes)
    : config_(config) {
  for (std::size_t n : tensor_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void AdamState::step(std::span<const std::span<double>> params,
                     std::span<const std::span<const double>> grads) {
  require_same_size(params.size(), m_.size(), "adam_step tensors");
  require_same_size(grads.size(), m_.size(), "adam_step gradients");
  for (std::size_t t = 0; t < m_.size(); ++t) {
    require_same_size(params[t].size(), m_[t].size(), "adam_step parameter");
    require_same_size(grads[t].size(), m_[t].size(), "adam_step gradient");
  }
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (std::size_t t = 0; t < m_.size(); ++t) {
    auto& m = m_[t];
    auto& v = v_[t];
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = grads[t][i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      params[t][i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

GradientCheckReport finite_difference_check(const std::function<double()>& loss,
                                             std::span<double> params,
                                             std::span<const double> analytic,
                                             const GradientCheckOptions& options) {
  require_same_size(params.size(), analytic.size(), "finite_difference_check");
  std::vector<std::size_t> coords(params.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  if (options.samples != 0 && options.samples < params.size()) {
    Rng rng(options.seed);
    shuffle(coords, rng);
    coords.resize(options.samples);
    std::sort(coords.begin(), coords.end());
  }

  GradientCheckReport report;
  for (std::size_t i : coords) {
    const double saved = params[i];
    params[i] = saved + options.step;
    const double plus = loss();
    params[i] = saved - options.step;
    const double minus = loss();
    params[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw InvalidArgument("finite_difference_check: non-finite loss at coordinate " +
                            std::to_string(i));
    }
    const double numeric = (plus - minus) / (2.0 * options.step);
    const double g = analytic[i];
    const double err =
        std::abs(g - numeric) / std::max({options.denominator_floor, std::abs(g), std::abs(numeric)});
    ++report.checked;
    if (report.checked == 1 || err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = i;
      report.worst_analytic = g;
      report.worst_numeric = numeric;
    }
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

GradientCheckReport merge(const GradientCheckReport& a, const GradientCheckReport& b) {
  GradientCheckReport out = a.max_relative_error >= b.max_relative_error ? a : b;
  out.checked = a.checked + b.checked;
  out.passed = a.passed && b.passed;
  return out;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw InvalidArgument("uniform_index: empty range");
  // Rejection sampling keeps the result unbiased and independent of the
  // standard library's distribution implementation.
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % range);
}

double uniform_real(Rng& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

}  // namespace abae
