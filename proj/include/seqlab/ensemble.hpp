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

// Span-level majority voting over the tag sequences of several models.

#ifndef SEQLAB_ENSEMBLE_HPP_
#define SEQLAB_ENSEMBLE_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "seqlab/corpus.hpp"

namespace seqlab {

// sentences[s][m] is model m's tag sequence for sentence s.
struct PredictionSet {
  std::size_t k = 0;
  std::vector<std::vector<std::vector<std::string>>> sentences;

  // Builds the set from k per-model prediction lists of equal sentence count.
  // Throws AlignmentError on mismatched sentence counts or lengths.
  static PredictionSet from_models(
      const std::vector<std::vector<std::vector<std::string>>> &per_model);
};

using VoteTally = std::map<EntitySpan, std::size_t>;

// Each member's sequence is repaired and converted to spans; identical
// (start, end, type) triples share a counter.
VoteTally tally_votes(const PredictionSet &pred_set, std::size_t sentence_index,
                      const LabelVocabulary &vocab);

// Smallest count that is a strict majority of k.
inline std::size_t majority_threshold(std::size_t k) { return k / 2 + 1; }

// Keeps spans with a strict majority, then resolves overlaps greedily in
// order (count desc, length desc, start asc, type asc). Output is sorted by
// start and non-overlapping.
std::vector<EntitySpan> vote_spans(const VoteTally &tally, std::size_t k);

std::vector<std::vector<std::string>> ensemble_predict(
    const PredictionSet &pred_set, const LabelVocabulary &vocab);

struct VoteSummary {
  std::size_t k = 0;
  std::size_t sentences = 0;
  std::size_t candidate_spans = 0;  // distinct spans proposed by any member
  std::size_t majority_spans = 0;   // candidates reaching the threshold
  std::size_t unanimous_spans = 0;
  std::size_t kept_spans = 0;       // after overlap resolution
};

// ensemble_predict plus vote statistics for reporting.
std::vector<std::vector<std::string>> ensemble_predict(
    const PredictionSet &pred_set, const LabelVocabulary &vocab,
    VoteSummary &summary);

}  // namespace seqlab

#endif  // SEQLAB_ENSEMBLE_HPP_
