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

// Linear-chain CRF over an L x K emission lattice.
//
// A label path y scores
//   start[y_0] + sum_t emissions[t, y_t] + sum_{t>0} transitions[y_{t-1}, y_t]
//   + stop[y_{L-1}]
// and is normalized over all K^L paths. All recursions run in log space.

#ifndef SEQLAB_CRF_HPP_
#define SEQLAB_CRF_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "seqlab/corpus.hpp"
#include "seqlab/matrix.hpp"
#include "seqlab/parameters.hpp"

namespace seqlab {

// Per-token, per-label scores produced by an encoder.
struct EmissionScores {
  Matrix scores;  // L x K

  std::size_t length() const { return scores.rows(); }
  std::size_t num_labels() const { return scores.cols(); }

  friend bool operator==(const EmissionScores &, const EmissionScores &) =
      default;
};

struct ViterbiResult {
  std::vector<Label> path;
  double score = 0.0;
};

// log(sum_j exp(v_j)) with max subtraction; -inf for an empty range.
double log_sum_exp(std::span<const double> v);

double crf_log_partition(const EmissionScores &emissions,
                         const ModelParameters &params);

// Throws ShapeError on length mismatch, IndexError on out-of-range labels.
double crf_score(const EmissionScores &emissions, const ModelParameters &params,
                 std::span<const Label> tags);

// crf_log_partition - crf_score, clamped at 0 against rounding.
double crf_nll(const EmissionScores &emissions, const ModelParameters &params,
               std::span<const Label> tags);

// Highest-scoring path. On ties the lowest label index wins at every
// backpointer and at the final position.
ViterbiResult viterbi_decode(const EmissionScores &emissions,
                             const ModelParameters &params);

// L x K matrix of per-position label probabilities (forward-backward).
Matrix crf_marginals(const EmissionScores &emissions,
                     const ModelParameters &params);

// NLL of `tags` plus its gradient. d_emissions (L x K) is overwritten with
// scale * dNLL/demissions; scale * dNLL/d{transitions,start,stop} is added
// into grads. Returns the unscaled NLL.
double crf_nll_backward(const EmissionScores &emissions,
                        const ModelParameters &params,
                        std::span<const Label> tags, double scale,
                        Matrix &d_emissions, GradientSet &grads);

}  // namespace seqlab

#endif  // SEQLAB_CRF_HPP_
