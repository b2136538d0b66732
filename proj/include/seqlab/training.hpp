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

// Training loop: Adam with separate encoder and CRF learning rates, linear
// warmup then linear decay, global-norm clipping and FGM adversarial
// training on the embedding table.

#ifndef SEQLAB_TRAINING_HPP_
#define SEQLAB_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seqlab/corpus.hpp"
#include "seqlab/model.hpp"

namespace seqlab {

struct OptimizerConfig {
  double base_lr = 1e-2;
  double crf_lr_multiplier = 100.0;
  double warmup_ratio = 0.10;
  std::size_t batch_size = 8;
  std::size_t max_seq_len = 256;
  std::size_t epochs = 30;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::optional<double> grad_clip_norm = 1.0;

  void validate() const;
};

struct FgmConfig {
  bool enabled = true;
  double epsilon = 1.0;

  void validate() const;
};

struct AdamState {
  GradientSet first_moment;
  GradientSet second_moment;
  std::size_t updates = 0;

  static AdamState for_parameters(const ModelParameters &params);
};

// Peak is base_lr for the encoder group and base_lr * crf_lr_multiplier for
// the CRF group. Rises linearly from 0 over round(warmup_ratio * total)
// steps, then falls linearly to 0 at total_steps. Throws RangeError if
// step > total_steps.
double lr_at_step(const OptimizerConfig &config, ParameterGroup group,
                  std::size_t step, std::size_t total_steps);

// epsilon * g / ||g||_F, or nullopt when ||g||_F < 1e-12 (the caller then
// skips the adversarial pass).
std::optional<Matrix> fgm_perturbation(const Matrix &embedding_gradient,
                                       double epsilon);

// One optimizer step:
//   1. clean forward/backward,
//   2. if FGM is on: perturb the embedding table by fgm_perturbation of its
//      gradient, add the gradient of the perturbed loss, restore the table,
//   3. clip the summed gradient to grad_clip_norm,
//   4. Adam update with per-group learning rates from lr_at_step.
// Returns the clean-pass batch loss. Throws TrainingAborted on a non-finite
// loss or gradient.
double train_step(ModelParameters &params, const ModelConfig &model_config,
                  const OptimizerConfig &opt_config, AdamState &opt_state,
                  std::span<const LabeledSequence> batch, const FgmConfig &fgm,
                  std::size_t step, std::size_t total_steps);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_micro_f1 = 0.0;

  friend bool operator==(const EpochRecord &, const EpochRecord &) = default;
};

struct TrainRunResult {
  ModelConfig config;  // as trained: sizes filled in, init_seed = seed
  ModelParameters params;
  std::vector<EpochRecord> history;
  std::uint64_t seed = 0;
};

// Trains one model. vocab_size and num_labels of model_config are taken from
// the corpus and init_seed is replaced by `seed`, which also drives the
// per-epoch shuffle. The dev corpus is re-indexed against the training
// vocabulary and scored after every epoch.
TrainRunResult train(const Corpus &corpus, const Corpus &dev_corpus,
                     const ModelConfig &model_config,
                     const OptimizerConfig &opt_config,
                     const FgmConfig &fgm_config, std::uint64_t seed);

struct RunConfigs {
  ModelConfig model;
  OptimizerConfig optimizer;
  FgmConfig fgm;
};

// One independent run per seed, results in seed order. Runs may execute in
// parallel. Throws ConfigError on duplicate seeds.
std::vector<TrainRunResult> run_seeds(const Corpus &corpus,
                                      const Corpus &dev_corpus,
                                      const RunConfigs &configs,
                                      std::span<const std::uint64_t> seeds);

// Decodes every sentence of `corpus` (re-indexed against the checkpoint's
// token vocabulary) and returns the predicted tags.
std::vector<std::vector<std::string>> predict_tags(
    const ModelParameters &params, const ModelConfig &config,
    const Corpus &corpus, const TokenVocabulary &token_vocab);

}  // namespace seqlab

#endif  // SEQLAB_TRAINING_HPP_
