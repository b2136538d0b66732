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

#include "seqlab/ensemble.hpp"

#include <algorithm>
#include <exception>

#include "seqlab/error.hpp"

namespace seqlab {

PredictionSet PredictionSet::from_models(
    const std::vector<std::vector<std::vector<std::string>>> &per_model) {
  if (per_model.empty()) throw ConfigError("prediction set needs >= 1 model");
  PredictionSet set;
  set.k = per_model.size();
  const std::size_t n = per_model[0].size();
  for (std::size_t m = 1; m < per_model.size(); ++m) {
    if (per_model[m].size() != n) {
      throw AlignmentError(std::min(n, per_model[m].size()),
                           "model " + std::to_string(m) + " has " +
                               std::to_string(per_model[m].size()) +
                               " sentences, model 0 has " + std::to_string(n));
    }
  }
  set.sentences.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t m = 0; m < set.k; ++m) {
      set.sentences[s].push_back(per_model[m][s]);
    }
  }
  return set;
}

VoteTally tally_votes(const PredictionSet &pred_set, std::size_t sentence_index,
                      const LabelVocabulary &vocab) {
  if (sentence_index >= pred_set.sentences.size()) {
    throw IndexError("sentence index " + std::to_string(sentence_index) +
                     " out of range");
  }
  const auto &members = pred_set.sentences[sentence_index];
  if (members.empty()) throw AlignmentError(sentence_index, "no predictions");
  VoteTally tally;
  for (const auto &tags : members) {
    if (tags.size() != members[0].size()) {
      throw AlignmentError(sentence_index,
                           "member sequences differ in length (" +
                               std::to_string(members[0].size()) + " vs " +
                               std::to_string(tags.size()) + ")");
    }
    for (auto &span : tags_to_spans(tags, vocab)) ++tally[std::move(span)];
  }
  return tally;
}

std::vector<EntitySpan> vote_spans(const VoteTally &tally, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  struct Candidate {
    const EntitySpan *span;
    std::size_t count;
  };
  std::vector<Candidate> candidates;
  for (const auto &[span, count] : tally) {
    if (count >= majority_threshold(k)) candidates.push_back({&span, count});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate &a, const Candidate &b) {
              if (a.count != b.count) return a.count > b.count;
              if (a.span->length() != b.span->length()) {
                return a.span->length() > b.span->length();
              }
              if (a.span->start != b.span->start) {
                return a.span->start < b.span->start;
              }
              return a.span->etype < b.span->etype;
            });
  std::vector<EntitySpan> kept;
  for (const auto &c : candidates) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const auto &s) {
      return s.overlaps(*c.span);
    });
    if (!clash) kept.push_back(*c.span);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::vector<std::string>> ensemble_predict(
    const PredictionSet &pred_set, const LabelVocabulary &vocab,
    VoteSummary &summary) {
  if (pred_set.k < 1 || pred_set.sentences.empty()) {
    throw ConfigError("empty prediction set");
  }
  const std::size_t n = pred_set.sentences.size();
  std::vector<std::vector<std::string>> out(n);
  std::vector<VoteSummary> parts(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < n; ++s) {
    try {
      if (pred_set.sentences[s].size() != pred_set.k) {
        throw AlignmentError(s, "expected " + std::to_string(pred_set.k) +
                                    " member predictions");
      }
      const VoteTally tally = tally_votes(pred_set, s, vocab);
      const auto spans = vote_spans(tally, pred_set.k);
      out[s] = spans_to_tags(spans, pred_set.sentences[s][0].size(), vocab);
      parts[s].candidate_spans = tally.size();
      for (const auto &[span, count] : tally) {
        if (count >= majority_threshold(pred_set.k)) ++parts[s].majority_spans;
        if (count == pred_set.k) ++parts[s].unanimous_spans;
      }
      parts[s].kept_spans = spans.size();
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (const auto &err : errors) {
    if (err) std::rethrow_exception(err);
  }
  summary = VoteSummary{};
  summary.k = pred_set.k;
  summary.sentences = n;
  for (const auto &p : parts) {
    summary.candidate_spans += p.candidate_spans;
    summary.majority_spans += p.majority_spans;
    summary.unanimous_spans += p.unanimous_spans;
    summary.kept_spans += p.kept_spans;
  }
  return out;
}

std::vector<std::vector<std::string>> ensemble_predict(
    const PredictionSet &pred_set, const LabelVocabulary &vocab) {
  VoteSummary ignored;
  return ensemble_predict(pred_set, vocab, ignored);
}

}  // namespace seqlab
