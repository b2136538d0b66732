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

#include "seqlab/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>

#include "seqlab/error.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/random.hpp"

namespace seqlab {

void OptimizerConfig::validate() const {
  if (!(base_lr > 0.0)) throw ConfigError("base_lr must be > 0");
  if (!(crf_lr_multiplier > 0.0)) {
    throw ConfigError("crf_lr_multiplier must be > 0");
  }
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
    throw ConfigError("warmup_ratio must be in [0, 1)");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_seq_len < 1) throw ConfigError("max_seq_len must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam betas must be in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  if (grad_clip_norm && !(*grad_clip_norm > 0.0)) {
    throw ConfigError("grad_clip_norm must be > 0");
  }
}

void FgmConfig::validate() const {
  if (enabled && !(epsilon > 0.0)) {
    throw ConfigError("fgm epsilon must be > 0 when FGM is enabled");
  }
}

AdamState AdamState::for_parameters(const ModelParameters &params) {
  return {zeros_like(params), zeros_like(params), 0};
}

double lr_at_step(const OptimizerConfig &config, ParameterGroup group,
                  std::size_t step, std::size_t total_steps) {
  if (total_steps < 1) throw RangeError("total_steps must be >= 1");
  if (step > total_steps) {
    throw RangeError("step " + std::to_string(step) + " > total_steps " +
                     std::to_string(total_steps));
  }
  const auto warmup = static_cast<std::size_t>(
      std::llround(config.warmup_ratio * static_cast<double>(total_steps)));
  double frac;
  if (step < warmup) {
    frac = static_cast<double>(step) / static_cast<double>(warmup);
  } else if (warmup >= total_steps) {
    frac = 1.0;
  } else {
    frac = static_cast<double>(total_steps - step) /
           static_cast<double>(total_steps - warmup);
  }
  const double lr = config.base_lr * frac;
  return group == ParameterGroup::kCrf ? lr * config.crf_lr_multiplier : lr;
}

std::optional<Matrix> fgm_perturbation(const Matrix &embedding_gradient,
                                       double epsilon) {
  double sq = 0.0;
  for (double v : embedding_gradient.values()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm >= 1e-12)) return std::nullopt;
  Matrix delta = embedding_gradient;
  const double factor = epsilon / norm;
  for (double &v : delta.values()) v *= factor;
  return delta;
}

namespace {

void adam_update(ModelParameters &params, const GradientSet &grad,
                 const OptimizerConfig &config, AdamState &state,
                 std::size_t step, std::size_t total_steps) {
  ++state.updates;
  const double t = static_cast<double>(state.updates);
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  const double lr_encoder =
      lr_at_step(config, ParameterGroup::kEncoder, step, total_steps);
  const double lr_crf = lr_at_step(config, ParameterGroup::kCrf, step, total_steps);
  for_each_array(
      [&](const ArrayInfo &info, Matrix &p, const Matrix &g, Matrix &m,
          Matrix &v) {
        const double lr =
            info.group == ParameterGroup::kCrf ? lr_crf : lr_encoder;
        auto pv = p.values();
        auto gv = g.values();
        auto mv = m.values();
        auto vv = v.values();
        for (std::size_t i = 0; i < pv.size(); ++i) {
          mv[i] = b1 * mv[i] + (1.0 - b1) * gv[i];
          vv[i] = b2 * vv[i] + (1.0 - b2) * gv[i] * gv[i];
          const double m_hat = mv[i] / correction1;
          const double v_hat = vv[i] / correction2;
          pv[i] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
        }
      },
      params, grad, state.first_moment, state.second_moment);
}

}  // namespace

double train_step(ModelParameters &params, const ModelConfig &model_config,
                  const OptimizerConfig &opt_config, AdamState &opt_state,
                  std::span<const LabeledSequence> batch, const FgmConfig &fgm,
                  std::size_t step, std::size_t total_steps) {
  LossAndGradient clean = compute_gradients(params, model_config, batch);
  if (!std::isfinite(clean.loss)) {
    throw TrainingAborted(step, "non-finite loss");
  }
  GradientSet &grad = clean.gradient;

  if (fgm.enabled) {
    if (auto delta = fgm_perturbation(grad.embedding, fgm.epsilon)) {
      const Matrix saved = params.embedding;
      auto ev = params.embedding.values();
      auto dv = delta->values();
      for (std::size_t i = 0; i < ev.size(); ++i) ev[i] += dv[i];
      try {
        const LossAndGradient adv = compute_gradients(params, model_config, batch);
        add_scaled(grad, adv.gradient);
      } catch (...) {
        params.embedding = saved;
        throw;
      }
      params.embedding = saved;
    }
  }

  if (!all_finite(grad)) throw TrainingAborted(step, "non-finite gradient");
  if (opt_config.grad_clip_norm) {
    const double norm = global_norm(grad);
    if (norm > *opt_config.grad_clip_norm) {
      scale(grad, *opt_config.grad_clip_norm / norm);
    }
  }
  adam_update(params, grad, opt_config, opt_state, step, total_steps);
  return clean.loss;
}

std::vector<std::vector<std::string>> predict_tags(
    const ModelParameters &params, const ModelConfig &config,
    const Corpus &corpus, const TokenVocabulary &token_vocab) {
  const Corpus indexed = reindex(corpus, token_vocab);
  std::vector<std::vector<TokenId>> inputs;
  inputs.reserve(indexed.size());
  for (const auto &s : indexed.sentences) inputs.push_back(s.token_ids);
  const auto labels = decode_batch(params, config, inputs);
  std::vector<std::vector<std::string>> out;
  out.reserve(labels.size());
  for (const auto &l : labels) out.push_back(to_tags(l, corpus.label_vocabulary));
  return out;
}

namespace {

double dev_micro_f1(const ModelParameters &params, const ModelConfig &config,
                    const std::vector<LabeledSequence> &dev,
                    const LabelVocabulary &vocab) {
  std::vector<std::vector<TokenId>> inputs;
  std::vector<std::vector<Label>> gold;
  inputs.reserve(dev.size());
  gold.reserve(dev.size());
  for (const auto &ex : dev) {
    inputs.push_back(ex.token_ids);
    gold.push_back(ex.labels);
  }
  const auto pred = decode_batch(params, config, inputs);
  return evaluate(std::span<const std::vector<Label>>(gold),
                  std::span<const std::vector<Label>>(pred), vocab)
      .micro_f1;
}

}  // namespace

TrainRunResult train(const Corpus &corpus, const Corpus &dev_corpus,
                     const ModelConfig &model_config,
                     const OptimizerConfig &opt_config,
                     const FgmConfig &fgm_config, std::uint64_t seed) {
  if (corpus.empty()) throw ConfigError("training corpus is empty");
  if (dev_corpus.empty()) throw ConfigError("dev corpus is empty");
  if (!(corpus.label_vocabulary == dev_corpus.label_vocabulary)) {
    throw ConfigError("training and dev corpora use different label vocabularies");
  }
  for (const Corpus *c : {&corpus, &dev_corpus}) {
    for (const auto &s : c->sentences) {
      if (!s.labeled()) throw ConfigError("training data must be tagged");
    }
  }
  opt_config.validate();
  fgm_config.validate();

  TrainRunResult result;
  result.seed = seed;
  result.config = model_config;
  result.config.vocab_size = corpus.token_vocabulary.size();
  result.config.num_labels = corpus.label_vocabulary.size();
  result.config.init_seed = seed;
  result.params = init_parameters(result.config);

  const auto train_set = to_sequences(corpus, opt_config.max_seq_len);
  const auto dev_set =
      to_sequences(reindex(dev_corpus, corpus.token_vocabulary), 0);

  const std::size_t batch_size = opt_config.batch_size;
  const std::size_t steps_per_epoch =
      (train_set.size() + batch_size - 1) / batch_size;
  const std::size_t total_steps = opt_config.epochs * steps_per_epoch;

  AdamState state = AdamState::for_parameters(result.params);
  // Distinct stream from parameter init.
  Rng shuffle_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabeledSequence> batch;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= opt_config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      batch.clear();
      const std::size_t end = std::min(order.size(), (b + 1) * batch_size);
      for (std::size_t i = b * batch_size; i < end; ++i) {
        batch.push_back(train_set[order[i]]);
      }
      loss_sum += train_step(result.params, result.config, opt_config, state,
                             batch, fgm_config, step, total_steps);
      ++step;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(steps_per_epoch);
    rec.dev_micro_f1 = dev_micro_f1(result.params, result.config, dev_set,
                                    corpus.label_vocabulary);
    result.history.push_back(rec);
  }
  return result;
}

std::vector<TrainRunResult> run_seeds(const Corpus &corpus,
                                      const Corpus &dev_corpus,
                                      const RunConfigs &configs,
                                      std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("no seeds given");
  std::set<std::uint64_t> seen;
  for (auto s : seeds) {
    if (!seen.insert(s).second) {
      throw ConfigError("duplicate seed " + std::to_string(s));
    }
  }
  std::vector<TrainRunResult> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    try {
      results[i] = train(corpus, dev_corpus, configs.model, configs.optimizer,
                         configs.fgm, seeds[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto &err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return results;
}

}  // namespace seqlab
