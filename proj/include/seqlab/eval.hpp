// Copyright 2026 The Seqlab Authors.
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

// Exact-match span scoring in the CoNLL style.

#ifndef SEQLAB_EVAL_HPP_
#define SEQLAB_EVAL_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqlab/corpus.hpp"

namespace seqlab {

struct TypeMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold_count = 0;
  std::size_t pred_count = 0;
  std::size_t tp = 0;
};

struct EvalReport {
  // One entry per entity type, in label-vocabulary order.
  std::vector<std::pair<std::string, TypeMetrics>> per_type;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;

  const TypeMetrics &at(const std::string &etype) const;
};

// 0/0 is 0 for precision, recall and F1.
TypeMetrics make_metrics(std::size_t tp, std::size_t gold, std::size_t pred);

// A true positive is an identical (start, end, type) span in the same
// sentence. Throws AlignmentError when sentence counts or lengths differ.
EvalReport evaluate(std::span<const std::vector<std::string>> gold,
                    std::span<const std::vector<std::string>> pred,
                    const LabelVocabulary &vocab);
EvalReport evaluate(std::span<const std::vector<Label>> gold,
                    std::span<const std::vector<Label>> pred,
                    const LabelVocabulary &vocab);

// Fixed-width Type/P/R/F1 table, percentages to two decimals, aggregate
// rows last.
std::string format_report(const EvalReport &report);

// Tab-separated type, precision, recall, f1, gold, pred, tp lines.
std::string format_report_tsv(const EvalReport &report);
void save_report_tsv(const std::filesystem::path &path,
                     const EvalReport &report);

}  // namespace seqlab

#endif  // SEQLAB_EVAL_HPP_
