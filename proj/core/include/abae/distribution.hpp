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
#include <span>
#include <vector>

namespace abae {

// A probability vector over K aspects. Construction checks the simplex
// invariant: entries non-negative and summing to 1 within kSimplexTolerance.
class AspectDistribution {
 public:
  static constexpr double kSimplexTolerance = 1e-6;

  AspectDistribution() = default;
  explicit AspectDistribution(std::vector<double> probabilities);

  static AspectDistribution uniform(std::size_t k);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> values() const { return p_; }
  std::size_t argmax() const;

  bool operator==(const AspectDistribution&) const = default;

 private:
  std::vector<double> p_;
};

// True when `p` is non-empty, non-negative and sums to 1 within `tolerance`.
bool is_simplex(std::span<const double> p, double tolerance = AspectDistribution::kSimplexTolerance);

}  // namespace abae
