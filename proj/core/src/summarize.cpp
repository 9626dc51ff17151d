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

#include "abae/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

#include "abae/error.hpp"

namespace abae {

namespace {

std::string clean_field(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::size_t parse_size(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto value = std::stoul(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return value;
  } catch (const std::exception&) {
    throw FormatError(where + ": expected a non-negative integer, got '" + text + "'");
  }
}

template <typename Fn>
void for_each_data_line(std::istream& in, const std::vector<std::string>& header, Fn fn) {
  std::string line;
  std::size_t line_number = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (!saw_header) {
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw FormatError("line 1: expected header columns " + expected);
      }
      saw_header = true;
      continue;
    }
    const std::string where = "line " + std::to_string(line_number);
    if (fields.size() != header.size()) {
      throw FormatError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                        std::to_string(fields.size()));
    }
    fn(fields, where);
  }
  if (!saw_header) throw FormatError("missing header line");
}

const std::vector<std::string> kSheetHeader = {"example_id", "listing_id", "sentence",
                                               "aspect",     "verdict",    "annotator"};
const std::vector<std::string> kKeyHeader = {"example_id", "listing_id", "aspect", "method",
                                             "rank",       "overlap",    "sentence"};

}  // namespace

Extraction extract_top_sentences(const std::string& listing_id,
                                 std::span<const CandidateSentence> candidates, AspectLabel label,
                                 const AspectModel& model, const AspectLabeling& labeling,
                                 std::size_t k) {
  if (labeling.labels.size() != model.num_aspects()) {
    throw InvalidArgument("extract_top_sentences: labeling does not cover the model's clusters");
  }
  const auto clusters = labeling.clusters_for(label);
  if (clusters.empty()) {
    throw InvalidArgument("extract_top_sentences: no cluster is labeled '" +
                          std::string(to_string(label)) + "'");
  }
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = model.extraction_score(candidates[i].token_ids, clusters);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  Extraction result;
  result.short_listing = candidates.size() < k;
  const std::size_t take = std::min(k, candidates.size());
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t i = order[r];
    result.sentences.push_back(
        {listing_id, label, model.method(), candidates[i].text, r + 1, scores[i]});
  }
  return result;
}

double precision_at_k(std::span<const VerdictGroup> groups, std::size_t k) {
  if (k == 0) throw InvalidArgument("precision_at_k: k must be >= 1");
  if (groups.empty()) throw InvalidArgument("precision_at_k: no groups");
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::size_t positives = 0;
    for (std::size_t rank = 1; rank <= k; ++rank) {
      const auto it = groups[g].find(rank);
      if (it == groups[g].end()) {
        throw InvalidArgument("precision_at_k: group " + std::to_string(g) + " is missing rank " +
                              std::to_string(rank));
      }
      if (it->second != 0 && it->second != 1) {
        throw InvalidArgument("precision_at_k: verdicts must be 0 or 1");
      }
      positives += static_cast<std::size_t>(it->second);
    }
    total += static_cast<double>(positives) / static_cast<double>(k);
  }
  return total / static_cast<double>(groups.size());
}

double fleiss_kappa(std::span<const std::vector<int>> counts) {
  if (counts.empty()) throw InvalidArgument("fleiss_kappa: no items");
  const std::size_t categories = counts.front().size();
  if (categories < 1) throw InvalidArgument("fleiss_kappa: no categories");
  const int raters = std::accumulate(counts.front().begin(), counts.front().end(), 0);
  if (raters < 2) throw InvalidArgument("fleiss_kappa: every item needs >= 2 raters");

  std::vector<double> column(categories, 0.0);
  double agreement = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& row = counts[i];
    if (row.size() != categories) throw InvalidArgument("fleiss_kappa: ragged count matrix");
    int n = 0;
    double pairs = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      if (row[j] < 0) throw InvalidArgument("fleiss_kappa: negative count");
      n += row[j];
      pairs += static_cast<double>(row[j]) * static_cast<double>(row[j] - 1);
      column[j] += row[j];
    }
    if (n != raters) {
      throw InvalidArgument("fleiss_kappa: item " + std::to_string(i) + " has " +
                            std::to_string(n) + " ratings, expected " + std::to_string(raters));
    }
    agreement += pairs / (static_cast<double>(raters) * static_cast<double>(raters - 1));
  }
  const double items = static_cast<double>(counts.size());
  const double p_bar = agreement / items;
  double p_e = 0.0;
  for (double c : column) {
    const double pj = c / (items * static_cast<double>(raters));
    p_e += pj * pj;
  }
  if (p_e >= 1.0) return 1.0;
  return (p_bar - p_e) / (1.0 - p_e);
}

EvaluationSheets build_evaluation_sheet(std::span<const ExtractedSentence> extracted,
                                        const SheetOptions& options) {
  if (options.annotators < 1) throw InvalidArgument("build_evaluation_sheet: need >= 1 annotator");
  EvaluationSheets sheets;
  const std::size_t n = extracted.size();
  const std::size_t width = std::max<std::size_t>(5, std::to_string(n).size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string number = std::to_string(i + 1);
    const std::string id = "ex" + std::string(width - number.size(), '0') + number;
    const auto& e = extracted[i];
    sheets.key.push_back({id, e.listing_id, e.aspect, e.method, e.rank, e.text, false});
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(options.seed);
  shuffle(order, rng);
  const auto overlap = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(options.overlap_fraction * static_cast<double>(n))));
  for (std::size_t i = 0; i < overlap; ++i) sheets.key[order[i]].overlap = true;

  std::vector<std::vector<std::size_t>> assigned(options.annotators);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < overlap) {
      for (auto& list : assigned) list.push_back(order[i]);
    } else {
      assigned[(i - overlap) % options.annotators].push_back(order[i]);
    }
  }
  for (std::size_t a = 0; a < options.annotators; ++a) {
    const std::string annotator = "a" + std::to_string(a + 1);
    for (std::size_t idx : assigned[a]) {
      const auto& k = sheets.key[idx];
      sheets.rows.push_back({k.example_id, k.listing_id, k.sentence, k.aspect, std::nullopt, annotator});
    }
  }
  return sheets;
}

void write_sheet(std::ostream& out, std::span<const SheetRow> rows) {
  for (std::size_t i = 0; i < kSheetHeader.size(); ++i) out << (i ? "\t" : "") << kSheetHeader[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.example_id << '\t' << r.listing_id << '\t' << clean_field(r.sentence) << '\t'
        << to_string(r.aspect) << '\t';
    if (r.verdict) out << *r.verdict;
    out << '\t' << r.annotator << '\n';
  }
}

std::vector<SheetRow> read_sheet(std::istream& in) {
  std::vector<SheetRow> rows;
  for_each_data_line(in, kSheetHeader, [&](const std::vector<std::string>& f, const std::string& where) {
    SheetRow row{f[0], f[1], f[2], AspectLabel::other, std::nullopt, f[5]};
    try {
      row.aspect = parse_label(f[3]);
    } catch (const InvalidArgument& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (!f[4].empty()) {
      if (f[4] != "0" && f[4] != "1") throw FormatError(where + ": verdict must be 0 or 1");
      row.verdict = f[4] == "1" ? 1 : 0;
    }
    if (row.example_id.empty() || row.annotator.empty()) {
      throw FormatError(where + ": example_id and annotator are required");
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

void write_key(std::ostream& out, std::span<const ExampleKey> key) {
  for (std::size_t i = 0; i < kKeyHeader.size(); ++i) out << (i ? "\t" : "") << kKeyHeader[i];
  out << '\n';
  for (const auto& k : key) {
    out << k.example_id << '\t' << k.listing_id << '\t' << to_string(k.aspect) << '\t'
        << to_string(k.method) << '\t' << k.rank << '\t' << (k.overlap ? 1 : 0) << '\t'
        << clean_field(k.sentence) << '\n';
  }
}

std::vector<ExampleKey> read_key(std::istream& in) {
  std::vector<ExampleKey> key;
  for_each_data_line(in, kKeyHeader, [&](const std::vector<std::string>& f, const std::string& where) {
    ExampleKey k;
    k.example_id = f[0];
    k.listing_id = f[1];
    try {
      k.aspect = parse_label(f[2]);
      k.method = parse_method(f[3]);
    } catch (const InvalidArgument& e) {
      throw FormatError(where + ": " + e.what());
    }
    k.rank = parse_size(f[4], where);
    k.overlap = f[5] == "1";
    k.sentence = f[6];
    key.push_back(std::move(k));
  });
  return key;
}

JudgmentSummary evaluate_judgments(std::span<const ExampleKey> key,
                                   std::span<const SheetRow> judged) {
  std::map<std::string, const ExampleKey*> by_id;
  for (const auto& k : key) by_id[k.example_id] = &k;

  std::map<std::string, std::map<std::string, int>> verdicts;  // example -> annotator -> verdict
  std::set<std::string> annotators;
  for (const auto& row : judged) {
    if (!by_id.contains(row.example_id)) {
      throw InvalidArgument("evaluate_judgments: unknown example '" + row.example_id + "'");
    }
    if (!row.verdict) {
      throw InvalidArgument("evaluate_judgments: example '" + row.example_id +
                            "' has no verdict from annotator '" + row.annotator + "'");
    }
    verdicts[row.example_id][row.annotator] = *row.verdict;
    annotators.insert(row.annotator);
  }

  using GroupKey = std::tuple<Method, AspectLabel, std::string>;
  std::map<GroupKey, VerdictGroup> groups;
  std::vector<std::vector<int>> agreement;
  for (const auto& [id, by_annotator] : verdicts) {
    const ExampleKey& k = *by_id.at(id);
    int yes = 0;
    for (const auto& [annotator, v] : by_annotator) yes += v;
    const int total = static_cast<int>(by_annotator.size());
    groups[{k.method, k.aspect, k.listing_id}][k.rank] = 2 * yes > total ? 1 : 0;
    if (annotators.size() >= 2 && by_annotator.size() == annotators.size()) {
      agreement.push_back({total - yes, yes});
    }
  }

  JudgmentSummary summary;
  std::map<std::pair<Method, AspectLabel>, std::vector<VerdictGroup>> cells;
  for (auto& [gk, group] : groups) {
    cells[{std::get<0>(gk), std::get<1>(gk)}].push_back(std::move(group));
  }
  for (const auto& [cell, list] : cells) {
    summary.precision[cell] = {precision_at_k(list, 1), precision_at_k(list, 3), list.size()};
  }
  summary.kappa_items = agreement.size();
  summary.kappa = agreement.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : fleiss_kappa(agreement);
  return summary;
}

void write_precision_table(std::ostream& out, const JudgmentSummary& summary) {
  char buf[64];
  out << "setup";
  for (AspectLabel l : kTargetLabels) out << '\t' << to_string(l);
  out << '\n';
  for (Method m : kAllMethods) {
    bool any = false;
    for (AspectLabel l : kTargetLabels) any = any || summary.precision.contains({m, l});
    if (!any) continue;
    out << to_string(m);
    for (AspectLabel l : kTargetLabels) {
      const auto it = summary.precision.find({m, l});
      if (it == summary.precision.end()) {
        out << "\t-";
      } else {
        std::snprintf(buf, sizeof buf, "\t%.2f/%.2f", it->second.at1, it->second.at3);
        out << buf;
      }
    }
    out << '\n';
  }
  if (summary.kappa_items == 0) {
    out << "fleiss_kappa\tn/a\n";
  } else {
    std::snprintf(buf, sizeof buf, "fleiss_kappa\t%.4f\t(%zu items)\n", summary.kappa,
                  summary.kappa_items);
    out << buf;
  }
}

}  // namespace abae
