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

#include "seqlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "seqlab/random.hpp"

namespace seqlab {

double GradcheckResult::max_error() const {
  double m = 0.0;
  for (const auto &a : arrays) m = std::max(m, a.max_relative_error);
  return m;
}

bool GradcheckResult::passed(double tolerance) const {
  return std::all_of(arrays.begin(), arrays.end(), [&](const ArrayError &a) {
    return a.max_relative_error <= tolerance;
  });
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  const double rel = std::abs(analytic - numeric) / denom;
  return std::isfinite(rel) ? rel : HUGE_VAL;
}

GradcheckResult run_gradcheck(const ModelConfig &base,
                              const GradcheckOptions &options) {
  GradcheckResult result;
  ModelConfig config = base;
  config.vocab_size = 7;
  config.num_labels = std::clamp<std::size_t>(base.num_labels, 2, 5);
  config.embedding_dim = std::clamp<std::size_t>(base.embedding_dim, 1, 4);
  config.hidden_dim = std::clamp<std::size_t>(base.hidden_dim, 1, 4);
  config.window_radius = std::min<std::size_t>(base.window_radius, 2);
  config.init_scale = 0.5;
  result.config = config;

  for_each_array(
      [&](const ArrayInfo &info, const Matrix &m) {
        if (!m.empty()) result.arrays.push_back({std::string(info.name), 0.0, 0});
      },
      init_parameters(config));

  Rng rng(options.seed);
  for (std::size_t inst = 0; inst < options.instances; ++inst) {
    config.init_seed = rng.next();
    ModelParameters params = init_parameters(config);
    for (Matrix *m : {&params.hidden_bias, &params.backward_bias,
                      &params.emission_bias, &params.crf_transitions,
                      &params.crf_start, &params.crf_stop}) {
      for (double &v : m->values()) v = rng.uniform(-0.5, 0.5);
    }
    LabeledSequence ex;
    const std::size_t len = rng.between(1, 5);
    for (std::size_t t = 0; t < len; ++t) {
      ex.token_ids.push_back(rng.below(config.vocab_size));
      ex.labels.push_back(rng.below(config.num_labels));
    }
    const LabeledSequence batch[] = {ex};

    GradientSet analytic = compute_gradients(params, config, batch).gradient;
    if (options.corrupt) options.corrupt(analytic);

    std::size_t slot = 0;
    for_each_array(
        [&](const ArrayInfo &, Matrix &p, const Matrix &g) {
          if (p.empty()) return;
          ArrayError &err = result.arrays[slot++];
          auto pv = p.values();
          auto gv = g.values();
          for (std::size_t i = 0; i < pv.size(); ++i) {
            const double saved = pv[i];
            pv[i] = saved + options.step;
            const double up = sentence_loss(params, config, ex);
            pv[i] = saved - options.step;
            const double down = sentence_loss(params, config, ex);
            pv[i] = saved;
            const double numeric = (up - down) / (2.0 * options.step);
            const double rel = relative_error(gv[i], numeric, options.floor);
            err.max_relative_error = std::max(err.max_relative_error, rel);
            ++err.entries;
          }
        },
        params, analytic);
  }
  return result;
}

}  // namespace seqlab
