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

#include "abae/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>

#include "abae/error.hpp"
#include "abae/numerics.hpp"
#include "abae/parallel.hpp"

namespace abae {

namespace {

AspectDistribution renormalized(std::vector<double> p) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
  return AspectDistribution(std::move(p));
}

void check_same_size(std::span<const AspectDistribution> parts, const char* what) {
  if (parts.empty()) throw InvalidArgument(std::string(what) + ": no distributions");
  for (const auto& d : parts) {
    if (d.size() != parts.front().size()) {
      throw InvalidArgument(std::string(what) + ": distributions of different lengths");
    }
  }
}

std::vector<double> smoothed(std::span<const double> p, double epsilon) {
  std::vector<double> out(p.begin(), p.end());
  double total = 0.0;
  for (double& x : out) {
    if (x < epsilon) x = epsilon;
    total += x;
  }
  for (double& x : out) x /= total;
  return out;
}

// Pairs (i < j) with order[i] > order[j].
std::uint64_t count_inversions(std::vector<std::size_t>& v, std::vector<std::size_t>& buffer,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count = count_inversions(v, buffer, lo, mid) + count_inversions(v, buffer, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      count += mid - i;
      buffer[k++] = v[j++];
    } else {
      buffer[k++] = v[i++];
    }
  }
  while (i < mid) buffer[k++] = v[i++];
  while (j < hi) buffer[k++] = v[j++];
  std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo),
            buffer.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return count;
}

std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

std::string_view to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::bos: return "bos";
    case Aggregation::bor: return "bor";
    case Aggregation::max_softmax: return "max_softmax";
  }
  return "bos";
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "bos") return Aggregation::bos;
  if (text == "bor") return Aggregation::bor;
  if (text == "max_softmax") return Aggregation::max_softmax;
  throw InvalidArgument("unknown aggregation '" + std::string(text) +
                        "' (expected bos, bor or max_softmax)");
}

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::listing: return "listing";
    case ObjectKind::review: return "review";
    case ObjectKind::sentence: return "sentence";
  }
  return "listing";
}

ObjectKind parse_object_kind(std::string_view text) {
  if (text == "listing") return ObjectKind::listing;
  if (text == "review") return ObjectKind::review;
  if (text == "sentence") return ObjectKind::sentence;
  throw InvalidArgument("unknown object kind '" + std::string(text) + "'");
}

AspectDistribution mean_distribution(std::span<const AspectDistribution> parts) {
  check_same_size(parts, "mean_distribution");
  std::vector<double> sum(parts.front().size(), 0.0);
  for (const auto& d : parts) axpy(1.0, d.values(), sum);
  return renormalized(std::move(sum));
}

GuestProfile aggregate_bos(std::string guest_id, std::span<const AspectDistribution> sentences) {
  check_same_size(sentences, "aggregate_bos");
  return {std::move(guest_id), mean_distribution(sentences), Aggregation::bos, sentences.size()};
}

GuestProfile aggregate_bor(std::string guest_id,
                           std::span<const std::vector<AspectDistribution>> reviews) {
  if (reviews.empty()) throw InvalidArgument("aggregate_bor: no reviews");
  std::vector<AspectDistribution> means;
  std::size_t count = 0;
  for (const auto& review : reviews) {
    if (review.empty()) throw InvalidArgument("aggregate_bor: review without sentences");
    means.push_back(mean_distribution(review));
    count += review.size();
  }
  return {std::move(guest_id), mean_distribution(means), Aggregation::bor, count};
}

GuestProfile aggregate_max_softmax(std::string guest_id,
                                   std::span<const AspectDistribution> sentences) {
  check_same_size(sentences, "aggregate_max_softmax");
  std::vector<double> peak(sentences.front().values().begin(), sentences.front().values().end());
  for (const auto& d : sentences) {
    for (std::size_t k = 0; k < peak.size(); ++k) peak[k] = std::max(peak[k], d[k]);
  }
  return {std::move(guest_id), AspectDistribution(softmax(peak)), Aggregation::max_softmax,
          sentences.size()};
}

GuestProfile aggregate_time_decayed(std::string guest_id,
                                    std::span<const AspectDistribution> sentences,
                                    std::span<const double> ages_days, double half_life_days) {
  check_same_size(sentences, "aggregate_time_decayed");
  if (ages_days.size() != sentences.size()) {
    throw InvalidArgument("aggregate_time_decayed: one age per sentence required");
  }
  if (!(half_life_days > 0.0)) {
    throw InvalidArgument("aggregate_time_decayed: half-life must be positive");
  }
  std::vector<double> sum(sentences.front().size(), 0.0);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!(ages_days[i] >= 0.0)) throw InvalidArgument("aggregate_time_decayed: negative age");
    axpy(std::exp2(-ages_days[i] / half_life_days), sentences[i].values(), sum);
  }
  return {std::move(guest_id), renormalized(std::move(sum)), Aggregation::bos, sentences.size()};
}

double symmetric_kl(std::span<const double> p, std::span<const double> q, double epsilon) {
  if (p.size() != q.size()) {
    throw InvalidArgument("symmetric_kl: length mismatch (" + std::to_string(p.size()) + " vs " +
                          std::to_string(q.size()) + ")");
  }
  if (p.empty()) throw InvalidArgument("symmetric_kl: empty distributions");
  const auto ps = smoothed(p, epsilon);
  const auto qs = smoothed(q, epsilon);
  double d = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) d += (ps[i] - qs[i]) * (std::log(ps[i]) - std::log(qs[i]));
  return std::max(d, 0.0);
}

double symmetric_kl(const AspectDistribution& p, const AspectDistribution& q, double epsilon) {
  return symmetric_kl(p.values(), q.values(), epsilon);
}

RankedList rank_objects(const AspectDistribution& profile, std::span<const RankableObject> objects,
                        ObjectKind kind) {
  RankedList list;
  list.kind = kind;
  std::set<std::string> seen;
  std::vector<std::pair<double, const std::string*>> scored;
  for (const auto& object : objects) {
    if (!seen.insert(object.id).second) {
      throw InvalidArgument("rank_objects: duplicate object id '" + object.id + "'");
    }
    if (object.parts.empty()) {
      list.skipped.push_back(object.id);
      continue;
    }
    scored.emplace_back(symmetric_kl(profile, mean_distribution(object.parts)), &object.id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return *a.second < *b.second;
  });
  for (const auto& [score, id] : scored) {
    list.ids.push_back(*id);
    list.scores.push_back(score);
  }
  std::sort(list.skipped.begin(), list.skipped.end());
  return list;
}

double kendall_tau(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw InvalidArgument("kendall_tau: rankings differ in length");
  if (a.size() < 2) throw InvalidArgument("kendall_tau: need at least two objects");
  std::unordered_map<std::string_view, std::size_t> position;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!position.emplace(b[i], i).second) {
      throw InvalidArgument("kendall_tau: duplicate id '" + b[i] + "'");
    }
  }
  std::vector<std::size_t> order;
  order.reserve(a.size());
  std::vector<bool> used(b.size(), false);
  for (const auto& id : a) {
    const auto it = position.find(id);
    if (it == position.end()) throw InvalidArgument("kendall_tau: id '" + id + "' missing");
    if (used[it->second]) throw InvalidArgument("kendall_tau: duplicate id '" + id + "'");
    used[it->second] = true;
    order.push_back(it->second);
  }
  std::vector<std::size_t> buffer(order.size());
  const std::uint64_t discordant = count_inversions(order, buffer, 0, order.size());
  const double n = static_cast<double>(a.size());
  const double pairs = n * (n - 1.0) / 2.0;
  return (pairs - 2.0 * static_cast<double>(discordant)) / pairs;
}

OlsFit ols_r2(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("ols_r2: x and y differ in length");
  if (x.size() < 2) throw InvalidArgument("ols_r2: need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("ols_r2: zero variance in x");
  if (syy == 0.0) throw InvalidArgument("ols_r2: y is constant, R^2 undefined");
  OlsFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = 1.0 - ss_res / syy;
  return fit;
}

std::vector<RankableObject> listing_objects(std::span<const ListingItem> listings) {
  std::vector<RankableObject> out;
  for (const auto& listing : listings) {
    RankableObject object{listing.listing_id, {}};
    for (const auto& review : listing.reviews) {
      for (const auto& s : review.sentences) object.parts.push_back(s.distribution);
    }
    out.push_back(std::move(object));
  }
  return out;
}

std::vector<RankableObject> objects_within(const ListingItem& listing, ObjectKind kind) {
  std::vector<RankableObject> out;
  for (const auto& review : listing.reviews) {
    if (kind == ObjectKind::review) {
      RankableObject object{review.review_id, {}};
      for (const auto& s : review.sentences) object.parts.push_back(s.distribution);
      out.push_back(std::move(object));
    } else if (kind == ObjectKind::sentence) {
      for (const auto& s : review.sentences) out.push_back({s.id, {s.distribution}});
    } else {
      throw InvalidArgument("objects_within: listings are not ranked within a listing");
    }
  }
  return out;
}

PairwiseResult pairwise_experiment(std::span<const GuestProfile> profiles,
                                   std::span<const ListingItem> listings, ObjectKind kind,
                                   std::size_t threads) {
  if (profiles.size() < 2) throw InvalidArgument("pairwise_experiment: need at least two profiles");

  // groups[g] holds the object sets that are ranked separately.
  std::vector<std::vector<RankableObject>> groups;
  if (kind == ObjectKind::listing) {
    groups.push_back(listing_objects(listings));
  } else {
    for (const auto& listing : listings) groups.push_back(objects_within(listing, kind));
  }

  const std::size_t g_count = groups.size();
  std::vector<std::vector<RankedList>> rankings(profiles.size(),
                                                std::vector<RankedList>(g_count));
  parallel_for(profiles.size(), threads, [&](std::size_t p) {
    for (std::size_t g = 0; g < g_count; ++g) {
      rankings[p][g] = rank_objects(profiles[p].distribution, groups[g], kind);
    }
  });

  std::vector<std::size_t> usable;
  for (std::size_t g = 0; g < g_count; ++g) {
    if (rankings[0][g].ids.size() >= 2) usable.push_back(g);
  }
  if (usable.empty()) {
    throw InvalidArgument("pairwise_experiment: no listing has at least two rankable " +
                          std::string(to_string(kind)) + " objects");
  }

  PairwiseResult result;
  result.kind = kind;
  result.listings_used = kind == ObjectKind::listing ? listings.size() : usable.size();
  for (std::size_t a = 0; a < profiles.size(); ++a) {
    for (std::size_t b = a + 1; b < profiles.size(); ++b) {
      double tau = 0.0;
      for (std::size_t g : usable) tau += kendall_tau(rankings[a][g].ids, rankings[b][g].ids);
      result.points.push_back({profiles[a].guest_id, profiles[b].guest_id,
                               symmetric_kl(profiles[a].distribution, profiles[b].distribution),
                               tau / static_cast<double>(usable.size())});
    }
  }
  std::vector<double> xs, ys;
  for (const auto& p : result.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  result.fit = ols_r2(xs, ys);
  return result;
}

void write_scatter_header(std::ostream& out) { out << "guest_a\tguest_b\tx_kl\ty_tau\tkind\tmethod\n"; }

void write_scatter(std::ostream& out, const PairwiseResult& result, std::string_view method) {
  for (const auto& p : result.points) {
    out << p.guest_a << '\t' << p.guest_b << '\t' << format_double(p.x) << '\t'
        << format_double(p.y) << '\t' << to_string(result.kind) << '\t' << method << '\n';
  }
}

void write_ranked_header(std::ostream& out) { out << "profile_id\tobject_id\trank\tscore\n"; }

void write_ranked(std::ostream& out, std::string_view profile_id, const RankedList& list) {
  for (std::size_t i = 0; i < list.ids.size(); ++i) {
    out << profile_id << '\t' << list.ids[i] << '\t' << (i + 1) << '\t'
        << format_double(list.scores[i]) << '\n';
  }
}

void write_profiles(std::ostream& out, std::span<const GuestProfile> profiles) {
  out << "guest_id\taggregation\tsentence_count";
  const std::size_t k = profiles.empty() ? 0 : profiles.front().distribution.size();
  for (std::size_t i = 0; i < k; ++i) out << "\tp" << i;
  out << '\n';
  for (const auto& p : profiles) {
    if (p.distribution.size() != k) throw InvalidArgument("write_profiles: mixed profile lengths");
    out << p.guest_id << '\t' << to_string(p.aggregation) << '\t' << p.sentence_count;
    for (double x : p.distribution.values()) out << '\t' << format_double(x);
    out << '\n';
  }
}

std::vector<GuestProfile> read_profiles(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("guest_id\taggregation\tsentence_count", 0) != 0) {
    throw FormatError("profiles: missing header");
  }
  std::vector<GuestProfile> profiles;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = "profiles line " + std::to_string(line_number);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 4) throw FormatError(where + ": too few columns");
    GuestProfile p;
    p.guest_id = fields[0];
    try {
      p.aggregation = parse_aggregation(fields[1]);
    } catch (const InvalidArgument& e) {
      throw FormatError(where + ": " + e.what());
    }
    const auto& c = fields[2];
    if (std::from_chars(c.data(), c.data() + c.size(), p.sentence_count).ec != std::errc{}) {
      throw FormatError(where + ": bad sentence count");
    }
    std::vector<double> values;
    for (std::size_t i = 3; i < fields.size(); ++i) {
      double x = 0.0;
      const auto& f = fields[i];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), x);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw FormatError(where + ": bad probability '" + f + "'");
      }
      values.push_back(x);
    }
    try {
      p.distribution = AspectDistribution(std::move(values));
    } catch (const InvalidArgument& e) {
      throw FormatError(where + ": " + e.what());
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

}  // namespace abae
