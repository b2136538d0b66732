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

#include "seqlab/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqlab/error.hpp"

namespace seqlab {

namespace {

void check_crf(const EmissionScores &em, const ModelParameters &p) {
  const std::size_t k = em.num_labels();
  if (p.crf_transitions.rows() != k || p.crf_transitions.cols() != k ||
      p.crf_start.size() != k || p.crf_stop.size() != k) {
    throw ShapeError("CRF parameters do not match " + std::to_string(k) +
                     " labels");
  }
  if (em.length() == 0) throw ShapeError("empty emission lattice");
}

void check_tags(const EmissionScores &em, std::span<const Label> tags) {
  if (tags.size() != em.length()) {
    throw ShapeError("tag sequence length " + std::to_string(tags.size()) +
                     " != emission length " + std::to_string(em.length()));
  }
  for (Label y : tags) {
    if (y >= em.num_labels()) {
      throw IndexError("label " + std::to_string(y) + " out of range");
    }
  }
}

// alpha(t, k): log-sum of all prefixes ending in label k at t, including
// emissions[t, k] and the start score.
Matrix forward_lattice(const EmissionScores &em, const ModelParameters &p) {
  const std::size_t n = em.length(), k = em.num_labels();
  Matrix alpha(n, k);
  std::vector<double> buf(k);
  for (std::size_t j = 0; j < k; ++j) {
    alpha(0, j) = p.crf_start(0, j) + em.scores(0, j);
  }
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < k; ++i) {
        buf[i] = alpha(t - 1, i) + p.crf_transitions(i, j);
      }
      alpha(t, j) = em.scores(t, j) + log_sum_exp(buf);
    }
  }
  return alpha;
}

// beta(t, k): log-sum of all suffixes after t given label k at t, including
// the stop score but not emissions[t, k].
Matrix backward_lattice(const EmissionScores &em, const ModelParameters &p) {
  const std::size_t n = em.length(), k = em.num_labels();
  Matrix beta(n, k);
  std::vector<double> buf(k);
  for (std::size_t j = 0; j < k; ++j) beta(n - 1, j) = p.crf_stop(0, j);
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        buf[j] = p.crf_transitions(i, j) + em.scores(t + 1, j) + beta(t + 1, j);
      }
      beta(t, i) = log_sum_exp(buf);
    }
  }
  return beta;
}

double final_log_sum(const Matrix &alpha, const ModelParameters &p) {
  const std::size_t last = alpha.rows() - 1;
  std::vector<double> buf(alpha.cols());
  for (std::size_t j = 0; j < buf.size(); ++j) {
    buf[j] = alpha(last, j) + p.crf_stop(0, j);
  }
  return log_sum_exp(buf);
}

}  // namespace

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double crf_log_partition(const EmissionScores &emissions,
                         const ModelParameters &params) {
  check_crf(emissions, params);
  return final_log_sum(forward_lattice(emissions, params), params);
}

double crf_score(const EmissionScores &emissions, const ModelParameters &params,
                 std::span<const Label> tags) {
  check_crf(emissions, params);
  check_tags(emissions, tags);
  double s = params.crf_start(0, tags[0]);
  for (std::size_t t = 0; t < tags.size(); ++t) {
    s += emissions.scores(t, tags[t]);
    if (t > 0) s += params.crf_transitions(tags[t - 1], tags[t]);
  }
  return s + params.crf_stop(0, tags.back());
}

double crf_nll(const EmissionScores &emissions, const ModelParameters &params,
               std::span<const Label> tags) {
  const double score = crf_score(emissions, params, tags);
  return std::max(0.0, crf_log_partition(emissions, params) - score);
}

ViterbiResult viterbi_decode(const EmissionScores &emissions,
                             const ModelParameters &params) {
  check_crf(emissions, params);
  const std::size_t n = emissions.length(), k = emissions.num_labels();
  Matrix delta(n, k);
  std::vector<std::vector<Label>> back(n, std::vector<Label>(k, 0));
  for (std::size_t j = 0; j < k; ++j) {
    delta(0, j) = params.crf_start(0, j) + emissions.scores(0, j);
  }
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      Label best = 0;
      double best_score = delta(t - 1, 0) + params.crf_transitions(0, j);
      for (std::size_t i = 1; i < k; ++i) {
        const double s = delta(t - 1, i) + params.crf_transitions(i, j);
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      back[t][j] = best;
      delta(t, j) = best_score + emissions.scores(t, j);
    }
  }
  ViterbiResult out;
  out.path.assign(n, 0);
  Label last = 0;
  out.score = delta(n - 1, 0) + params.crf_stop(0, 0);
  for (std::size_t j = 1; j < k; ++j) {
    const double s = delta(n - 1, j) + params.crf_stop(0, j);
    if (s > out.score) {
      out.score = s;
      last = j;
    }
  }
  out.path[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) out.path[t - 1] = back[t][out.path[t]];
  return out;
}

Matrix crf_marginals(const EmissionScores &emissions,
                     const ModelParameters &params) {
  check_crf(emissions, params);
  const Matrix alpha = forward_lattice(emissions, params);
  const Matrix beta = backward_lattice(emissions, params);
  const double log_z = final_log_sum(alpha, params);
  Matrix out(emissions.length(), emissions.num_labels());
  for (std::size_t t = 0; t < out.rows(); ++t) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      out(t, j) = std::exp(alpha(t, j) + beta(t, j) - log_z);
    }
  }
  return out;
}

double crf_nll_backward(const EmissionScores &emissions,
                        const ModelParameters &params,
                        std::span<const Label> tags, double scale,
                        Matrix &d_emissions, GradientSet &grads) {
  check_crf(emissions, params);
  check_tags(emissions, tags);
  const std::size_t n = emissions.length(), k = emissions.num_labels();
  const Matrix alpha = forward_lattice(emissions, params);
  const Matrix beta = backward_lattice(emissions, params);
  const double log_z = final_log_sum(alpha, params);

  d_emissions = Matrix(n, k);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      d_emissions(t, j) = scale * std::exp(alpha(t, j) + beta(t, j) - log_z);
    }
    d_emissions(t, tags[t]) -= scale;
  }
  for (std::size_t j = 0; j < k; ++j) {
    grads.crf_start(0, j) += d_emissions(0, j);
    grads.crf_stop(0, j) += d_emissions(n - 1, j);
  }
  // Pairwise marginals p(y_{t-1} = i, y_t = j).
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double lp = alpha(t - 1, i) + params.crf_transitions(i, j) +
                          emissions.scores(t, j) + beta(t, j) - log_z;
        grads.crf_transitions(i, j) += scale * std::exp(lp);
      }
    }
    grads.crf_transitions(tags[t - 1], tags[t]) -= scale;
  }

  double score = params.crf_start(0, tags[0]);
  for (std::size_t t = 0; t < n; ++t) {
    score += emissions.scores(t, tags[t]);
    if (t > 0) score += params.crf_transitions(tags[t - 1], tags[t]);
  }
  score += params.crf_stop(0, tags.back());
  return std::max(0.0, log_z - score);
}

}  // namespace seqlab
