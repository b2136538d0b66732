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

// Independent reference computations used by the tests. Nothing here calls
// the library's numeric kernels.

#ifndef SEQLAB_TESTS_ORACLES_HPP_
#define SEQLAB_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "seqlab/model.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;  // [t][label]

struct Crf {
  Grid emissions;
  Grid transitions;  // [from][to]
  std::vector<double> start;
  std::vector<double> stop;
};

inline Grid to_grid(const seqlab::Matrix &m) {
  Grid g(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) g[r][c] = m(r, c);
  }
  return g;
}

inline Crf make_crf(const seqlab::Matrix &em, const seqlab::ModelParameters &p) {
  return {to_grid(em), to_grid(p.crf_transitions), to_grid(p.crf_start)[0],
          to_grid(p.crf_stop)[0]};
}

inline double path_score(const Crf &c, const std::vector<std::size_t> &y) {
  double s = c.start[y[0]] + c.stop[y.back()];
  for (std::size_t t = 0; t < y.size(); ++t) {
    s += c.emissions[t][y[t]];
    if (t > 0) s += c.transitions[y[t - 1]][y[t]];
  }
  return s;
}

// Calls fn(path) for every label sequence, in lexicographic order.
template <typename Fn>
void for_each_path(std::size_t length, std::size_t k, Fn &&fn) {
  std::vector<std::size_t> y(length, 0);
  while (true) {
    fn(y);
    std::size_t i = length;
    while (i > 0) {
      --i;
      if (++y[i] < k) break;
      y[i] = 0;
      if (i == 0) return;
    }
    if (length == 0) return;
  }
}

struct Enumeration {
  double log_z = 0.0;
  std::vector<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  Grid marginals;
};

inline Enumeration enumerate(const Crf &c) {
  const std::size_t n = c.emissions.size(), k = c.start.size();
  std::vector<std::pair<double, std::vector<std::size_t>>> all;
  for_each_path(n, k, [&](const std::vector<std::size_t> &y) {
    all.emplace_back(path_score(c, y), y);
  });
  Enumeration e;
  double m = -std::numeric_limits<double>::infinity();
  for (const auto &[s, y] : all) {
    if (s > e.best_score) {
      e.best_score = s;
      e.best = y;
    }
    m = std::max(m, s);
  }
  double sum = 0.0;
  for (const auto &a : all) sum += std::exp(a.first - m);
  e.log_z = m + std::log(sum);
  e.marginals.assign(n, std::vector<double>(k, 0.0));
  for (const auto &[s, y] : all) {
    const double p = std::exp(s - e.log_z);
    for (std::size_t t = 0; t < n; ++t) e.marginals[t][y[t]] += p;
  }
  return e;
}

// Straightforward re-implementation of the encoders and heads.
inline Grid emissions(const seqlab::ModelParameters &p,
                      const seqlab::ModelConfig &c,
                      const std::vector<std::size_t> &ids) {
  const std::size_t n = ids.size(), e = c.embedding_dim, h = c.hidden_dim;
  const Grid emb = to_grid(p.embedding);
  Grid feats(n);
  if (c.encoder_kind == seqlab::EncoderKind::kNone) {
    for (std::size_t t = 0; t < n; ++t) feats[t] = emb[ids[t]];
  } else if (c.encoder_kind == seqlab::EncoderKind::kWindowMlp) {
    const long r = static_cast<long>(c.window_radius);
    for (std::size_t t = 0; t < n; ++t) {
      std::vector<double> x;
      for (long d = -r; d <= r; ++d) {
        const long pos = static_cast<long>(t) + d;
        for (std::size_t j = 0; j < e; ++j) {
          x.push_back(pos < 0 || pos >= static_cast<long>(n)
                          ? 0.0
                          : emb[ids[static_cast<std::size_t>(pos)]][j]);
        }
      }
      feats[t].resize(h);
      for (std::size_t j = 0; j < h; ++j) {
        double a = p.hidden_bias(0, j);
        for (std::size_t i = 0; i < x.size(); ++i) a += x[i] * p.hidden_weights(i, j);
        feats[t][j] = std::tanh(a);
      }
    }
  } else {
    Grid fwd(n, std::vector<double>(h, 0.0)), bwd(n, std::vector<double>(h, 0.0));
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < h; ++j) {
        double a = p.hidden_bias(0, j);
        for (std::size_t i = 0; i < e; ++i) a += emb[ids[t]][i] * p.hidden_weights(i, j);
        if (t > 0) {
          for (std::size_t i = 0; i < h; ++i) a += fwd[t - 1][i] * p.recurrent_weights(i, j);
        }
        fwd[t][j] = std::tanh(a);
      }
    }
    for (std::size_t t = n; t-- > 0;) {
      for (std::size_t j = 0; j < h; ++j) {
        double a = p.backward_bias(0, j);
        for (std::size_t i = 0; i < e; ++i) {
          a += emb[ids[t]][i] * p.backward_input_weights(i, j);
        }
        if (t + 1 < n) {
          for (std::size_t i = 0; i < h; ++i) {
            a += bwd[t + 1][i] * p.backward_recurrent_weights(i, j);
          }
        }
        bwd[t][j] = std::tanh(a);
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      feats[t] = fwd[t];
      feats[t].insert(feats[t].end(), bwd[t].begin(), bwd[t].end());
    }
  }
  const std::size_t k = c.num_labels;
  Grid out(n, std::vector<double>(k));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      double a = p.emission_bias(0, j);
      for (std::size_t i = 0; i < feats[t].size(); ++i) {
        a += feats[t][i] * p.emission_weights(i, j);
      }
      out[t][j] = a;
    }
  }
  return out;
}

// CRF: -log p(y|x) by enumeration. Softmax: mean token cross-entropy,
// weighted by (1 - p)^gamma for the focal head.
inline double loss(const seqlab::ModelParameters &p, const seqlab::ModelConfig &c,
                   const std::vector<std::size_t> &ids,
                   const std::vector<std::size_t> &labels) {
  const Grid em = emissions(p, c, ids);
  if (c.head_kind == seqlab::HeadKind::kCrf) {
    Crf crf{em, to_grid(p.crf_transitions), to_grid(p.crf_start)[0],
            to_grid(p.crf_stop)[0]};
    return enumerate(crf).log_z - path_score(crf, labels);
  }
  const double gamma =
      c.head_kind == seqlab::HeadKind::kSoftmaxFocal ? c.focal_gamma : 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < em.size(); ++t) {
    double z = 0.0;
    for (double v : em[t]) z += std::exp(v);
    const double prob = std::exp(em[t][labels[t]]) / z;
    total += -std::pow(1.0 - prob, gamma) * std::log(prob);
  }
  return total / static_cast<double>(em.size());
}

// Spans from BIO strings: "I-t" opens a span unless it continues one of t.
struct Span {
  std::size_t start, end;
  std::string etype;
  bool operator==(const Span &) const = default;
};

inline std::vector<Span> spans(const std::vector<std::string> &tags) {
  std::vector<Span> out;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string &tag = tags[i];
    if (tag == "O") {
      open = false;
      continue;
    }
    const std::string etype = tag.substr(2);
    if (tag[0] == 'I' && open && out.back().etype == etype) {
      out.back().end = i + 1;
    } else {
      out.push_back({i, i + 1, etype});
      open = true;
    }
  }
  return out;
}

// Warmup then linear decay, written as a closed-form piecewise function.
inline double schedule(double peak, double ratio, double step, double total) {
  const double warm = std::round(ratio * total);
  if (warm > 0 && step < warm) return peak * step / warm;
  return peak * (total - step) / (total - warm);
}

}  // namespace oracle

#endif  // SEQLAB_TESTS_ORACLES_HPP_
