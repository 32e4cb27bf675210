// Copyright 2026 The castdigest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "castdigest/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>

#include "castdigest/error.h"
#include "castdigest/text.h"
#include "json.hpp"
#include "parallel.h"
#include "rng_util.h"

namespace castdigest {
namespace {

using nlohmann::json;

std::map<std::vector<std::string_view>, std::size_t> NGramCounts(
    std::span<const std::string> tokens, std::size_t n) {
  std::map<std::vector<std::string_view>, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + i,
                                       tokens.begin() + i + n);
    ++counts[std::move(gram)];
  }
  return counts;
}

double Mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

MetricStats Stats(const std::vector<double>& xs) {
  MetricStats out;
  out.mean = Mean(xs);
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

ScoreStats StatsOf(std::span<const RougeReport> reports,
                   const RougeScore RougeReport::*metric) {
  std::vector<double> p, r, f;
  for (const RougeReport& rep : reports) {
    p.push_back((rep.*metric).precision);
    r.push_back((rep.*metric).recall);
    f.push_back((rep.*metric).f1);
  }
  return {Stats(p), Stats(r), Stats(f)};
}

json ScoreJson(const RougeScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

json StatsJson(const MetricStats& m) {
  return {{"mean", m.mean}, {"std", m.std}};
}

json ScoreStatsJson(const ScoreStats& s) {
  return {{"precision", StatsJson(s.precision)},
          {"recall", StatsJson(s.recall)},
          {"f1", StatsJson(s.f1)}};
}

}  // namespace

RougeScore ScoreFromCounts(const RougeCounts& c) {
  RougeScore s;
  if (c.candidate_total > 0) {
    s.precision = static_cast<double>(c.overlap) /
                  static_cast<double>(c.candidate_total);
  }
  if (c.reference_total > 0) {
    s.recall = static_cast<double>(c.overlap) /
               static_cast<double>(c.reference_total);
  }
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

std::vector<std::string> RougeTokenize(std::string_view text) {
  return AlnumTokens(text);
}

RougeCounts RougeNCounts(std::span<const std::string> candidate,
                         std::span<const std::string> reference,
                         std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  RougeCounts out;
  out.candidate_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  out.reference_total = reference.size() >= n ? reference.size() - n + 1 : 0;
  if (out.candidate_total == 0 || out.reference_total == 0) {
    // No n-grams on one side: nothing can match and the score is all zero.
    return out;
  }
  const auto cand = NGramCounts(candidate, n);
  const auto ref = NGramCounts(reference, n);
  // Merge-walk the two sorted maps.
  auto c = cand.begin();
  auto r = ref.begin();
  while (c != cand.end() && r != ref.end()) {
    if (c->first < r->first) {
      ++c;
    } else if (r->first < c->first) {
      ++r;
    } else {
      out.overlap += std::min(c->second, r->second);
      ++c;
      ++r;
    }
  }
  return out;
}

RougeScore RougeN(std::span<const std::string> candidate,
                  std::span<const std::string> reference, std::size_t n) {
  return ScoreFromCounts(RougeNCounts(candidate, reference, n));
}

std::size_t LcsLength(std::span<const std::string> a,
                      std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], row[j - 1]);
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

RougeCounts RougeLCounts(std::span<const std::string> candidate,
                         std::span<const std::string> reference) {
  return {LcsLength(candidate, reference), candidate.size(), reference.size()};
}

RougeScore RougeL(std::span<const std::string> candidate,
                  std::span<const std::string> reference) {
  return ScoreFromCounts(RougeLCounts(candidate, reference));
}

RougeReport ScoreTexts(std::string_view candidate,
                       std::string_view reference) {
  const auto cand = RougeTokenize(candidate);
  const auto ref = RougeTokenize(reference);
  return {RougeN(cand, ref, 1), RougeN(cand, ref, 2), RougeL(cand, ref)};
}

std::string SelectionText(const SentenceDoc& doc,
                          std::span<const std::size_t> indices) {
  std::string out;
  for (std::size_t i : indices) {
    if (i >= doc.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "sentence " + std::to_string(i) + " not in " +
                      doc.episode_id,
                  i);
    }
    if (!out.empty()) out += ' ';
    out += doc.sentences[i].text;
  }
  return out;
}

RougeReport Evaluate(const SentenceDoc& doc,
                     std::span<const std::size_t> predicted,
                     std::span<const std::size_t> reference) {
  return ScoreTexts(SelectionText(doc, predicted),
                    SelectionText(doc, reference));
}

RougeReport MeanReport(std::span<const RougeReport> reports) {
  if (reports.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no reports to average");
  }
  RougeReport out;
  for (auto metric :
       {&RougeReport::rouge1, &RougeReport::rouge2, &RougeReport::rougeL}) {
    RougeScore& acc = out.*metric;
    for (const RougeReport& r : reports) {
      acc.precision += (r.*metric).precision;
      acc.recall += (r.*metric).recall;
      acc.f1 += (r.*metric).f1;
    }
    const double n = static_cast<double>(reports.size());
    acc.precision /= n;
    acc.recall /= n;
    acc.f1 /= n;
  }
  return out;
}

std::vector<Fold> KFoldSplit(std::vector<std::string> ids, std::size_t k,
                             std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "need k >= 2 folds");
  if (ids.size() < k) {
    throw Error(ErrorCode::kInvalidArgument,
                std::to_string(ids.size()) + " ids cannot fill " +
                    std::to_string(k) + " folds");
  }
  // Sorting first makes the split independent of input order.
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::kDuplicateId, "episode ids must be unique");
  }
  std::mt19937_64 rng(internal::SplitMix64(seed));
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    std::swap(ids[i], ids[internal::UniformBelow(rng, i + 1)]);
  }

  std::vector<Fold> folds(k);
  const std::size_t base = ids.size() / k;
  const std::size_t extra = ids.size() % k;
  std::size_t begin = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].test.assign(ids.begin() + begin, ids.begin() + begin + size);
    folds[f].train.assign(ids.begin(), ids.begin() + begin);
    folds[f].train.insert(folds[f].train.end(), ids.begin() + begin + size,
                          ids.end());
    begin += size;
  }
  return folds;
}

CrossValReport Aggregate(std::span<const RougeReport> per_fold) {
  if (per_fold.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no folds to aggregate");
  }
  CrossValReport out;
  out.per_fold.assign(per_fold.begin(), per_fold.end());
  out.rouge1 = StatsOf(per_fold, &RougeReport::rouge1);
  out.rouge2 = StatsOf(per_fold, &RougeReport::rouge2);
  out.rougeL = StatsOf(per_fold, &RougeReport::rougeL);
  return out;
}

ExperimentReport RunCrossValidation(const Corpus& corpus,
                                    std::span<const SummarySystem> systems,
                                    std::size_t k_folds, std::uint64_t seed,
                                    std::size_t workers) {
  std::map<std::string, const CorpusRecord*> annotated;
  for (const CorpusRecord& r : corpus) {
    if (r.annotation && r.provenance.kind == Provenance::Kind::kOriginal) {
      annotated.emplace(r.episode_id(), &r);
    }
  }
  std::vector<std::string> ids;
  for (const auto& [id, r] : annotated) ids.push_back(id);

  ExperimentReport report;
  report.k_folds = k_folds;
  report.seed = seed;
  report.folds = KFoldSplit(ids, k_folds, seed);
  for (const SummarySystem& s : systems) report.systems.push_back(s.name);

  // fold_reports[system][fold]
  std::vector<std::vector<RougeReport>> fold_reports(
      systems.size(), std::vector<RougeReport>(k_folds));
  internal::ParallelFor(k_folds, workers, [&](std::size_t f) {
    for (std::size_t s = 0; s < systems.size(); ++s) {
      std::vector<RougeReport> episodes;
      for (const std::string& id : report.folds[f].test) {
        const CorpusRecord& r = *annotated.at(id);
        const Selection sel = systems[s].select(r.doc);
        episodes.push_back(
            Evaluate(r.doc, sel.indices, r.annotation->selected_indices));
      }
      fold_reports[s][f] = MeanReport(episodes);
    }
  });
  for (const auto& per_fold : fold_reports) {
    report.results.push_back(Aggregate(per_fold));
  }
  return report;
}

std::string ExperimentReportToJson(const ExperimentReport& report) {
  json folds = json::array();
  for (const Fold& f : report.folds) folds.push_back({{"test", f.test}});
  json rows = json::array();
  for (std::size_t s = 0; s < report.systems.size(); ++s) {
    const CrossValReport& cv = report.results[s];
    json per_fold = json::array();
    for (const RougeReport& r : cv.per_fold) {
      per_fold.push_back({{"rouge1", ScoreJson(r.rouge1)},
                          {"rouge2", ScoreJson(r.rouge2)},
                          {"rougeL", ScoreJson(r.rougeL)}});
    }
    rows.push_back({{"system", report.systems[s]},
                    {"rouge1", ScoreStatsJson(cv.rouge1)},
                    {"rouge2", ScoreStatsJson(cv.rouge2)},
                    {"rougeL", ScoreStatsJson(cv.rougeL)},
                    {"per_fold", std::move(per_fold)}});
  }
  const json out = {{"k_folds", report.k_folds},
                    {"seed", report.seed},
                    {"folds", std::move(folds)},
                    {"rows", std::move(rows)}};
  return out.dump(2) + "\n";
}

std::string ExperimentReportToTable(const ExperimentReport& report) {
  std::size_t width = 6;
  for (const std::string& name : report.systems) {
    width = std::max(width, name.size());
  }
  const auto cell = [](const MetricStats& m) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f ± %.3f", m.mean, m.std);
    return std::string(buf);
  };
  const auto pad = [](std::string s, std::size_t w) {
    // "±" is two bytes but one column.
    const std::size_t visible = s.size() - (s.find("±") != std::string::npos);
    if (visible < w) s.append(w - visible, ' ');
    return s;
  };
  std::string out = pad("System", width) + "  " + pad("ROUGE-1", 15) + "  " +
                    pad("ROUGE-2", 15) + "  ROUGE-L\n";
  for (std::size_t s = 0; s < report.systems.size(); ++s) {
    const CrossValReport& cv = report.results[s];
    out += pad(report.systems[s], width) + "  " + pad(cell(cv.rouge1.f1), 15) +
           "  " + pad(cell(cv.rouge2.f1), 15) + "  " + cell(cv.rougeL.f1) +
           "\n";
  }
  return out;
}

std::string SelectedIndexHistogramCsv(
    const Corpus& corpus,
    std::span<const std::vector<std::size_t>> selections) {
  std::size_t total_sentences = 0;
  for (const CorpusRecord& r : corpus) total_sentences += r.doc.size();
  std::map<std::size_t, std::size_t> counts;
  for (const auto& sel : selections) {
    for (std::size_t i : sel) ++counts[i];
  }
  std::string out = "index,normalized_count\n";
  if (counts.empty()) return out;
  const std::size_t last = counts.rbegin()->first;
  for (std::size_t i = 0; i <= last; ++i) {
    const auto it = counts.find(i);
    const double value =
        it == counts.end() || total_sentences == 0
            ? 0.0
            : static_cast<double>(it->second) /
                  static_cast<double>(total_sentences);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, value);
    out += buf;
  }
  return out;
}

}  // namespace castdigest
