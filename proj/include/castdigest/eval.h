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

#ifndef CASTDIGEST_EVAL_H_
#define CASTDIGEST_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "castdigest/datastore.h"
#include "castdigest/segmenter.h"
#include "castdigest/summarizer.h"

namespace castdigest {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const RougeScore&) const = default;
};

// The integer quantities a ROUGE score is computed from. For ROUGE-N the
// overlap is the clipped n-gram match count and the totals are n-gram counts;
// for ROUGE-L the overlap is the LCS length and the totals are token counts.
struct RougeCounts {
  std::size_t overlap = 0;
  std::size_t candidate_total = 0;
  std::size_t reference_total = 0;

  bool operator==(const RougeCounts&) const = default;
};

struct RougeReport {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;

  bool operator==(const RougeReport&) const = default;
};

// P = overlap / candidate_total, R = overlap / reference_total, F their
// harmonic mean; every component is 0 when its denominator is.
RougeScore ScoreFromCounts(const RougeCounts& counts);

// Lowercase maximal alphanumeric runs. No stemming, no stopwords.
std::vector<std::string> RougeTokenize(std::string_view text);

RougeCounts RougeNCounts(std::span<const std::string> candidate,
                         std::span<const std::string> reference,
                         std::size_t n);
RougeScore RougeN(std::span<const std::string> candidate,
                  std::span<const std::string> reference, std::size_t n);

std::size_t LcsLength(std::span<const std::string> a,
                      std::span<const std::string> b);
RougeCounts RougeLCounts(std::span<const std::string> candidate,
                         std::span<const std::string> reference);
RougeScore RougeL(std::span<const std::string> candidate,
                  std::span<const std::string> reference);

// ROUGE-1/2/L of two texts.
RougeReport ScoreTexts(std::string_view candidate, std::string_view reference);

// Selected sentence texts in index order, joined by single spaces.
std::string SelectionText(const SentenceDoc& doc,
                          std::span<const std::size_t> indices);

RougeReport Evaluate(const SentenceDoc& doc,
                     std::span<const std::size_t> predicted,
                     std::span<const std::size_t> reference);

// Component-wise mean of several reports.
RougeReport MeanReport(std::span<const RougeReport> reports);

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

inline constexpr std::size_t kDefaultFolds = 5;

// Seeded shuffle, then k contiguous test blocks whose sizes differ by at most
// one (larger blocks first). Train is the complement of test.
std::vector<Fold> KFoldSplit(std::vector<std::string> ids,
                             std::size_t k = kDefaultFolds,
                             std::uint64_t seed = 0);

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single fold

  bool operator==(const MetricStats&) const = default;
};

struct ScoreStats {
  MetricStats precision;
  MetricStats recall;
  MetricStats f1;

  bool operator==(const ScoreStats&) const = default;
};

struct CrossValReport {
  std::vector<RougeReport> per_fold;
  ScoreStats rouge1;
  ScoreStats rouge2;
  ScoreStats rougeL;

  bool operator==(const CrossValReport&) const = default;
};

CrossValReport Aggregate(std::span<const RougeReport> per_fold);

// A named way of turning a document into a selection.
struct SummarySystem {
  std::string name;
  std::function<Selection(const SentenceDoc&)> select;
};

struct ExperimentReport {
  std::size_t k_folds = 0;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
  std::vector<std::string> systems;  // row order
  std::vector<CrossValReport> results;  // aligned with systems
};

// Evaluates every system on the test split of every fold, averaging episode
// reports within a fold and aggregating across folds. Only annotated
// original records take part; augmented copies are skipped. Folds run on up
// to `workers` threads; output does not depend on the worker count.
ExperimentReport RunCrossValidation(const Corpus& corpus,
                                    std::span<const SummarySystem> systems,
                                    std::size_t k_folds, std::uint64_t seed,
                                    std::size_t workers = 1);

// JSON with one row per system and mean/std columns per ROUGE component.
std::string ExperimentReportToJson(const ExperimentReport& report);

// Fixed-width table of F-measure mean ± std per system.
std::string ExperimentReportToTable(const ExperimentReport& report);

// "index,normalized_count" CSV: how often each sentence index was selected,
// divided by the total number of sentences in `corpus`.
std::string SelectedIndexHistogramCsv(
    const Corpus& corpus, std::span<const std::vector<std::size_t>> selections);

}  // namespace castdigest

#endif  // CASTDIGEST_EVAL_H_
