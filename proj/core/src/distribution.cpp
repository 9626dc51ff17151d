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

#include "abae/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "abae/error.hpp"

namespace abae {

bool is_simplex(std::span<const double> p, double tolerance) {
  if (p.empty()) return false;
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= tolerance;
}

AspectDistribution::AspectDistribution(std::vector<double> probabilities)
    : p_(std::move(probabilities)) {
  if (!is_simplex(p_)) {
    double total = 0.0;
    for (double x : p_) total += x;
    throw InvalidArgument("AspectDistribution: not a simplex (size " +
                          std::to_string(p_.size()) + ", sum " + std::to_string(total) + ")");
  }
}

AspectDistribution AspectDistribution::uniform(std::size_t k) {
  if (k == 0) throw InvalidArgument("AspectDistribution::uniform: k must be positive");
  return AspectDistribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

std::size_t AspectDistribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(p_.begin(), p_.end()) - p_.begin());
}

}  // namespace abae
