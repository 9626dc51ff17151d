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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abae/distribution.hpp"

namespace abae {

enum class Aggregation { bos, bor, max_softmax };

std::string_view to_string(Aggregation aggregation);
Aggregation parse_aggregation(std::string_view text);

struct GuestProfile {
  std::string guest_id;
  AspectDistribution distribution;
  Aggregation aggregation = Aggregation::bos;
  std::size_t sentence_count = 0;
};

// Arithmetic mean of equally sized distributions.
AspectDistribution mean_distribution(std::span<const AspectDistribution> parts);

GuestProfile aggregate_bos(std::string guest_id, std::span<const AspectDistribution> sentences);
// Mean per review, then mean over reviews.
GuestProfile aggregate_bor(std::string guest_id,
                           std::span<const std::vector<AspectDistribution>> reviews);
// Per-dimension maximum followed by a softmax.
GuestProfile aggregate_max_softmax(std::string guest_id,
                                   std::span<const AspectDistribution> sentences);

// Weighted BoS with weight 0.5^(age / half_life) per sentence. Ages are in
// days and must be non-negative; half_life must be positive.
GuestProfile aggregate_time_decayed(std::string guest_id,
                                    std::span<const AspectDistribution> sentences,
                                    std::span<const double> ages_days, double half_life_days);

inline constexpr double kKlSmoothing = 1e-10;

// KL(p||q) + KL(q||p) in nats after flooring entries at `epsilon` and
// renormalizing both sides.
double symmetric_kl(std::span<const double> p, std::span<const double> q,
                    double epsilon = kKlSmoothing);
double symmetric_kl(const AspectDistribution& p, const AspectDistribution& q,
                    double epsilon = kKlSmoothing);

enum class ObjectKind { listing, review, sentence };

inline constexpr ObjectKind kAllObjectKinds[] = {ObjectKind::listing, ObjectKind::review,
                                                 ObjectKind::sentence};

std::string_view to_string(ObjectKind kind);
ObjectKind parse_object_kind(std::string_view text);

// Anything rankable: its distribution is the mean of `parts`.
struct RankableObject {
  std::string id;
  std::vector<AspectDistribution> parts;
};

struct RankedList {
  ObjectKind kind = ObjectKind::listing;
  std::vector<std::string> ids;
  std::vector<double> scores;        // symmetric KL to the profile, non-decreasing
  std::vector<std::string> skipped;  // objects without any part
};

// Ascending symmetric KL to `profile`; ties by id. Duplicate ids throw.
RankedList rank_objects(const AspectDistribution& profile, std::span<const RankableObject> objects,
                        ObjectKind kind);

// Kendall's tau-a between two total orders over the same ids.
double kendall_tau(std::span<const std::string> a, std::span<const std::string> b);

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

// Least squares y = intercept + slope * x. Throws on fewer than two points,
// zero variance in x or constant y.
OlsFit ols_r2(std::span<const double> x, std::span<const double> y);

struct SentenceItem {
  std::string id;
  AspectDistribution distribution;
};

struct ReviewItem {
  std::string review_id;
  std::vector<SentenceItem> sentences;
};

struct ListingItem {
  std::string listing_id;
  std::vector<ReviewItem> reviews;
};

// One object per listing (BoS over all its sentences).
std::vector<RankableObject> listing_objects(std::span<const ListingItem> listings);
// The reviews or sentences of one listing.
std::vector<RankableObject> objects_within(const ListingItem& listing, ObjectKind kind);

struct CorrelationPoint {
  std::string guest_a;
  std::string guest_b;
  double x = 0.0;  // symmetric KL between the two profiles
  double y = 0.0;  // Kendall's tau between their rankings
};

struct PairwiseResult {
  ObjectKind kind = ObjectKind::listing;
  std::vector<CorrelationPoint> points;
  OlsFit fit;
  std::size_t listings_used = 0;
};

// Every guest pair gets x = symmetric KL of the profiles and y = tau between
// their rankings. Listings are ranked together; reviews and sentences are
// ranked within each listing and tau is averaged (unweighted) over listings
// with at least two objects.
PairwiseResult pairwise_experiment(std::span<const GuestProfile> profiles,
                                   std::span<const ListingItem> listings, ObjectKind kind,
                                   std::size_t threads = 1);

// Columns: guest_a, guest_b, x_kl, y_tau, kind, method.
void write_scatter_header(std::ostream& out);
void write_scatter(std::ostream& out, const PairwiseResult& result, std::string_view method);
// Columns: profile_id, object_id, rank, score.
void write_ranked_header(std::ostream& out);
void write_ranked(std::ostream& out, std::string_view profile_id, const RankedList& list);

// Columns: guest_id, aggregation, sentence_count, p0..p{K-1}.
void write_profiles(std::ostream& out, std::span<const GuestProfile> profiles);
std::vector<GuestProfile> read_profiles(std::istream& in);

}  // namespace abae
