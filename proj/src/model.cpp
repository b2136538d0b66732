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

#include "seqlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "seqlab/error.hpp"
#include "seqlab/random.hpp"

namespace seqlab {

const char *to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kNone:
      return "none";
    case EncoderKind::kWindowMlp:
      return "window_mlp";
    case EncoderKind::kBiRecurrent:
      return "bi_recurrent";
  }
  return "?";
}

const char *to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::kCrf:
      return "crf";
    case HeadKind::kSoftmax:
      return "softmax";
    case HeadKind::kSoftmaxFocal:
      return "softmax_focal";
  }
  return "?";
}

std::optional<EncoderKind> parse_encoder_kind(const std::string &s) {
  for (auto k : {EncoderKind::kNone, EncoderKind::kWindowMlp,
                 EncoderKind::kBiRecurrent}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::optional<HeadKind> parse_head_kind(const std::string &s) {
  for (auto k : {HeadKind::kCrf, HeadKind::kSoftmax, HeadKind::kSoftmaxFocal}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::size_t ModelConfig::feature_dim() const {
  switch (encoder_kind) {
    case EncoderKind::kNone:
      return embedding_dim;
    case EncoderKind::kWindowMlp:
      return hidden_dim;
    case EncoderKind::kBiRecurrent:
      return 2 * hidden_dim;
  }
  return 0;
}

void ModelConfig::validate() const {
  if (vocab_size < 1) throw ConfigError("vocab_size must be >= 1");
  if (num_labels < 1) throw ConfigError("num_labels must be >= 1");
  if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (!(focal_gamma >= 0.0) || !std::isfinite(focal_gamma)) {
    throw ConfigError("focal_gamma must be a finite nonnegative number");
  }
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw ConfigError("init_scale must be a finite nonnegative number");
  }
}

std::vector<LabeledSequence> to_sequences(const Corpus &corpus,
                                          std::size_t max_len) {
  std::vector<LabeledSequence> out;
  out.reserve(corpus.size());
  for (const auto &s : corpus.sentences) {
    LabeledSequence ex;
    ex.token_ids = s.token_ids;
    if (s.labeled()) ex.labels = to_labels(s.tags, corpus.label_vocabulary);
    if (max_len > 0 && ex.token_ids.size() > max_len) {
      ex.token_ids.resize(max_len);
      if (!ex.labels.empty()) ex.labels.resize(max_len);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

ModelParameters init_parameters(const ModelConfig &config) {
  config.validate();
  const std::size_t e = config.embedding_dim, h = config.hidden_dim;
  const std::size_t k = config.num_labels;
  ModelParameters p;
  p.embedding = Matrix(config.vocab_size, e);
  switch (config.encoder_kind) {
    case EncoderKind::kNone:
      break;
    case EncoderKind::kWindowMlp:
      p.hidden_weights = Matrix((2 * config.window_radius + 1) * e, h);
      p.hidden_bias = Matrix(1, h);
      break;
    case EncoderKind::kBiRecurrent:
      p.hidden_weights = Matrix(e, h);
      p.hidden_bias = Matrix(1, h);
      p.recurrent_weights = Matrix(h, h);
      p.backward_input_weights = Matrix(e, h);
      p.backward_recurrent_weights = Matrix(h, h);
      p.backward_bias = Matrix(1, h);
      break;
  }
  p.emission_weights = Matrix(config.feature_dim(), k);
  p.emission_bias = Matrix(1, k);
  if (config.head_kind == HeadKind::kCrf) {
    p.crf_transitions = Matrix(k, k);
    p.crf_start = Matrix(1, k);
    p.crf_stop = Matrix(1, k);
  }

  Rng rng(config.init_seed);
  const double a = config.init_scale;
  for (Matrix *w : {&p.embedding, &p.hidden_weights, &p.recurrent_weights,
                    &p.backward_input_weights, &p.backward_recurrent_weights,
                    &p.emission_weights}) {
    for (double &v : w->values()) v = rng.uniform(-a, a);
  }
  return p;
}

namespace {

// Intermediate values of one forward pass, kept for backprop.
struct ForwardCache {
  Matrix inputs;    // none/recurrent: L x E; window: L x (2r+1)E
  Matrix hidden;    // window: L x H; recurrent: L x 2H as [forward, backward]
  EmissionScores emissions;

  const Matrix &features(EncoderKind kind) const {
    return kind == EncoderKind::kNone ? inputs : hidden;
  }
};

// out(t, :) = x(t, :) * w + b
Matrix affine(const Matrix &x, const Matrix &w, const Matrix &b) {
  Matrix out(x.rows(), w.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    auto o = out.row(t);
    for (std::size_t j = 0; j < w.cols(); ++j) o[j] = b(0, j);
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double xi = x(t, i);
      if (xi == 0.0) continue;
      auto wr = w.row(i);
      for (std::size_t j = 0; j < w.cols(); ++j) o[j] += xi * wr[j];
    }
  }
  return out;
}

// Backprop through affine(): dw += x^T dy, db += colsum(dy),
// returns dx = dy w^T.
Matrix affine_backward(const Matrix &x, const Matrix &w, const Matrix &dy,
                       Matrix &dw, Matrix &db) {
  Matrix dx(x.rows(), x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    auto g = dy.row(t);
    for (std::size_t j = 0; j < g.size(); ++j) db(0, j) += g[j];
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double xi = x(t, i);
      auto dwr = dw.row(i);
      auto wr = w.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        dwr[j] += xi * g[j];
        acc += wr[j] * g[j];
      }
      dx(t, i) = acc;
    }
  }
  return dx;
}

// One tanh RNN step: out = tanh(x w_in + prev w_rec + b).
void rnn_step(std::span<const double> x, std::span<const double> prev,
              const Matrix &w_in, const Matrix &w_rec, const Matrix &b,
              std::span<double> out) {
  const std::size_t h = out.size();
  for (std::size_t j = 0; j < h; ++j) out[j] = b(0, j);
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto wr = w_in.row(i);
    for (std::size_t j = 0; j < h; ++j) out[j] += x[i] * wr[j];
  }
  for (std::size_t i = 0; i < prev.size(); ++i) {
    auto wr = w_rec.row(i);
    for (std::size_t j = 0; j < h; ++j) out[j] += prev[i] * wr[j];
  }
  for (double &v : out) v = std::tanh(v);
}

ForwardCache forward(const ModelParameters &p, const ModelConfig &config,
                     std::span<const TokenId> ids) {
  if (ids.empty()) throw ShapeError("empty token sequence");
  for (TokenId id : ids) {
    if (id >= config.vocab_size || id >= p.embedding.rows()) {
      throw IndexError("token id " + std::to_string(id) +
                       " out of range for vocabulary of " +
                       std::to_string(config.vocab_size));
    }
  }
  const std::size_t n = ids.size(), e = config.embedding_dim;
  const std::size_t h = config.hidden_dim;
  ForwardCache c;
  switch (config.encoder_kind) {
    case EncoderKind::kNone:
    case EncoderKind::kBiRecurrent: {
      c.inputs = Matrix(n, e);
      for (std::size_t t = 0; t < n; ++t) {
        std::copy_n(p.embedding.row(ids[t]).begin(), e, c.inputs.row(t).begin());
      }
      break;
    }
    case EncoderKind::kWindowMlp: {
      const std::size_t r = config.window_radius;
      c.inputs = Matrix(n, (2 * r + 1) * e);
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t slot = 0; slot < 2 * r + 1; ++slot) {
          if (t + slot < r || t + slot - r >= n) continue;  // zero padding
          auto src = p.embedding.row(ids[t + slot - r]);
          std::copy_n(src.begin(), e, c.inputs.row(t).begin() + slot * e);
        }
      }
      break;
    }
  }
  if (config.encoder_kind == EncoderKind::kWindowMlp) {
    c.hidden = affine(c.inputs, p.hidden_weights, p.hidden_bias);
    for (double &v : c.hidden.values()) v = std::tanh(v);
  } else if (config.encoder_kind == EncoderKind::kBiRecurrent) {
    c.hidden = Matrix(n, 2 * h);
    for (std::size_t t = 0; t < n; ++t) {
      std::span<const double> prev;
      if (t > 0) prev = c.hidden.row(t - 1).first(h);
      rnn_step(c.inputs.row(t), prev, p.hidden_weights, p.recurrent_weights,
               p.hidden_bias, c.hidden.row(t).first(h));
    }
    for (std::size_t t = n; t-- > 0;) {
      std::span<const double> next;
      if (t + 1 < n) next = c.hidden.row(t + 1).last(h);
      rnn_step(c.inputs.row(t), next, p.backward_input_weights,
               p.backward_recurrent_weights, p.backward_bias,
               c.hidden.row(t).last(h));
    }
  }
  c.emissions.scores =
      affine(c.features(config.encoder_kind), p.emission_weights, p.emission_bias);
  return c;
}

// Softmax head loss; if d_emissions is non-null it receives
// scale * dloss/demissions.
double softmax_head(const EmissionScores &em, std::span<const Label> tags,
                    double gamma, double scale, Matrix *d_emissions) {
  const std::size_t n = em.length(), k = em.num_labels();
  if (tags.size() != n) {
    throw ShapeError("tag sequence length " + std::to_string(tags.size()) +
                     " != emission length " + std::to_string(n));
  }
  if (d_emissions) *d_emissions = Matrix(n, k);
  std::vector<double> prob(k);
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const Label y = tags[t];
    if (y >= k) throw IndexError("label " + std::to_string(y) + " out of range");
    auto z = em.scores.row(t);
    const double lse = log_sum_exp(z);
    double rest = 0.0;  // 1 - p, summed directly for accuracy
    for (std::size_t j = 0; j < k; ++j) {
      prob[j] = std::exp(z[j] - lse);
      if (j != y) rest += prob[j];
    }
    const double log_p = z[y] - lse;
    const double p = prob[y];
    const double weight = gamma == 0.0 ? 1.0 : std::pow(rest, gamma);
    total += -weight * log_p;
    if (d_emissions) {
      // dloss/dz_j = coef * (1[j == y] - prob_j)
      double coef = -weight;
      if (gamma != 0.0 && rest > 0.0) {
        coef += gamma * std::pow(rest, gamma - 1.0) * p * log_p;
      }
      const double s = scale / static_cast<double>(n);
      for (std::size_t j = 0; j < k; ++j) {
        (*d_emissions)(t, j) = s * coef * ((j == y ? 1.0 : 0.0) - prob[j]);
      }
    }
  }
  return total / static_cast<double>(n);
}

double head_gamma(const ModelConfig &config) {
  return config.head_kind == HeadKind::kSoftmaxFocal ? config.focal_gamma : 0.0;
}

void check_example(const LabeledSequence &ex) {
  if (ex.labels.size() != ex.token_ids.size()) {
    throw ShapeError("example has " + std::to_string(ex.token_ids.size()) +
                     " tokens but " + std::to_string(ex.labels.size()) +
                     " labels");
  }
}

// Adds scale * d(loss of `ex`) into grads; returns the unscaled loss.
double accumulate_sentence(const ModelParameters &p, const ModelConfig &config,
                           const LabeledSequence &ex, double scale,
                           GradientSet &g) {
  check_example(ex);
  const ForwardCache c = forward(p, config, ex.token_ids);
  Matrix d_em;
  double loss;
  if (config.head_kind == HeadKind::kCrf) {
    loss = crf_nll_backward(c.emissions, p, ex.labels, scale, d_em, g);
  } else {
    loss = softmax_head(c.emissions, ex.labels, head_gamma(config), scale, &d_em);
  }

  const Matrix d_features =
      affine_backward(c.features(config.encoder_kind), p.emission_weights, d_em,
                      g.emission_weights, g.emission_bias);

  const std::size_t n = ex.token_ids.size(), e = config.embedding_dim;
  const std::size_t h = config.hidden_dim;
  auto scatter_embedding = [&](std::size_t t, std::span<const double> d) {
    auto row = g.embedding.row(ex.token_ids[t]);
    for (std::size_t i = 0; i < e; ++i) row[i] += d[i];
  };

  switch (config.encoder_kind) {
    case EncoderKind::kNone:
      for (std::size_t t = 0; t < n; ++t) scatter_embedding(t, d_features.row(t));
      break;
    case EncoderKind::kWindowMlp: {
      Matrix d_pre = d_features;
      for (std::size_t i = 0; i < d_pre.size(); ++i) {
        const double a = c.hidden.values()[i];
        d_pre.values()[i] *= 1.0 - a * a;
      }
      const Matrix d_in = affine_backward(c.inputs, p.hidden_weights, d_pre,
                                          g.hidden_weights, g.hidden_bias);
      const std::size_t r = config.window_radius;
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t slot = 0; slot < 2 * r + 1; ++slot) {
          if (t + slot < r || t + slot - r >= n) continue;
          scatter_embedding(t + slot - r, d_in.row(t).subspan(slot * e, e));
        }
      }
      break;
    }
    case EncoderKind::kBiRecurrent: {
      std::vector<double> carry(h, 0.0), dz(h);
      auto step_back = [&](std::size_t t, std::span<const double> state,
                           std::span<const double> upstream,
                           std::span<const double> prev_state,
                           const Matrix &w_in, const Matrix &w_rec,
                           Matrix &dw_in, Matrix &dw_rec, Matrix &db) {
        for (std::size_t j = 0; j < h; ++j) {
          dz[j] = (upstream[j] + carry[j]) * (1.0 - state[j] * state[j]);
          db(0, j) += dz[j];
        }
        auto x = c.inputs.row(t);
        std::vector<double> dx(e, 0.0);
        for (std::size_t i = 0; i < e; ++i) {
          auto dwr = dw_in.row(i);
          auto wr = w_in.row(i);
          for (std::size_t j = 0; j < h; ++j) {
            dwr[j] += x[i] * dz[j];
            dx[i] += wr[j] * dz[j];
          }
        }
        scatter_embedding(t, dx);
        for (std::size_t i = 0; i < h; ++i) {
          auto wr = w_rec.row(i);
          double acc = 0.0;
          for (std::size_t j = 0; j < h; ++j) acc += wr[j] * dz[j];
          if (!prev_state.empty()) {
            auto dwr = dw_rec.row(i);
            for (std::size_t j = 0; j < h; ++j) dwr[j] += prev_state[i] * dz[j];
          }
          carry[i] = acc;
        }
      };
      for (std::size_t t = n; t-- > 0;) {
        std::span<const double> prev;
        if (t > 0) prev = c.hidden.row(t - 1).first(h);
        step_back(t, c.hidden.row(t).first(h), d_features.row(t).first(h), prev,
                  p.hidden_weights, p.recurrent_weights, g.hidden_weights,
                  g.recurrent_weights, g.hidden_bias);
      }
      std::fill(carry.begin(), carry.end(), 0.0);
      for (std::size_t t = 0; t < n; ++t) {
        std::span<const double> next;
        if (t + 1 < n) next = c.hidden.row(t + 1).last(h);
        step_back(t, c.hidden.row(t).last(h), d_features.row(t).last(h), next,
                  p.backward_input_weights, p.backward_recurrent_weights,
                  g.backward_input_weights, g.backward_recurrent_weights,
                  g.backward_bias);
      }
      break;
    }
  }
  return loss;
}

void check_batch(std::span<const LabeledSequence> batch) {
  if (batch.empty()) throw ShapeError("empty batch");
}

}  // namespace

EmissionScores encode(const ModelParameters &params, const ModelConfig &config,
                      std::span<const TokenId> token_ids) {
  return forward(params, config, token_ids).emissions;
}

double softmax_loss(const EmissionScores &emissions, std::span<const Label> tags,
                    double focal_gamma) {
  return softmax_head(emissions, tags, focal_gamma, 1.0, nullptr);
}

double sentence_loss(const ModelParameters &params, const ModelConfig &config,
                     const LabeledSequence &example) {
  check_example(example);
  const EmissionScores em = encode(params, config, example.token_ids);
  if (config.head_kind == HeadKind::kCrf) {
    return crf_nll(em, params, example.labels);
  }
  return softmax_loss(em, example.labels, head_gamma(config));
}

LossAndGradient compute_gradients(const ModelParameters &params,
                                  const ModelConfig &config,
                                  std::span<const LabeledSequence> batch) {
  check_batch(batch);
  const std::size_t b = batch.size();
  const double scale = 1.0 / static_cast<double>(b);
  std::vector<GradientSet> parts(b);
  std::vector<double> losses(b, 0.0);
  std::vector<std::exception_ptr> errors(b);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < b; ++i) {
    try {
      parts[i] = zeros_like(params);
      losses[i] = accumulate_sentence(params, config, batch[i], scale, parts[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto &err : errors) {
    if (err) std::rethrow_exception(err);
  }

  LossAndGradient out{0.0, std::move(parts[0])};
  out.loss = losses[0];
  for (std::size_t i = 1; i < b; ++i) {
    add_scaled(out.gradient, parts[i]);
    out.loss += losses[i];
  }
  out.loss *= scale;
  return out;
}

LossAndGradient compute_gradients_serial(const ModelParameters &params,
                                         const ModelConfig &config,
                                         std::span<const LabeledSequence> batch) {
  check_batch(batch);
  const double scale = 1.0 / static_cast<double>(batch.size());
  LossAndGradient out{0.0, zeros_like(params)};
  for (const auto &ex : batch) {
    out.loss += accumulate_sentence(params, config, ex, scale, out.gradient);
  }
  out.loss *= scale;
  return out;
}

std::vector<Label> decode(const ModelParameters &params,
                          const ModelConfig &config,
                          std::span<const TokenId> token_ids) {
  const EmissionScores em = encode(params, config, token_ids);
  if (config.head_kind == HeadKind::kCrf) {
    return viterbi_decode(em, params).path;
  }
  std::vector<Label> out(em.length());
  for (std::size_t t = 0; t < em.length(); ++t) {
    auto row = em.scores.row(t);
    out[t] = static_cast<Label>(std::max_element(row.begin(), row.end()) -
                                row.begin());
  }
  return out;
}

std::vector<std::vector<Label>> decode_batch(
    const ModelParameters &params, const ModelConfig &config,
    std::span<const std::vector<TokenId>> inputs) {
  std::vector<std::vector<Label>> out(inputs.size());
  std::vector<std::exception_ptr> errors(inputs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    try {
      out[i] = decode(params, config, inputs[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto &err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

std::vector<std::vector<Label>> decode_batch_serial(
    const ModelParameters &params, const ModelConfig &config,
    std::span<const std::vector<TokenId>> inputs) {
  std::vector<std::vector<Label>> out;
  out.reserve(inputs.size());
  for (const auto &ids : inputs) out.push_back(decode(params, config, ids));
  return out;
}

}  // namespace seqlab
