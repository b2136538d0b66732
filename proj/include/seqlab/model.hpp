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

// Trainable sequence scorer: token embeddings, an optional encoder, a linear
// emission projection and either a CRF or a per-token softmax head.
//
// Encoders:
//   none          emissions = embedding[x_t] W + b
//   window_mlp    tanh layer over the concatenated embeddings of a
//                 [t - r, t + r] window (zero padded), then the projection
//   bi_recurrent  forward and backward tanh RNNs, concatenated, projected

#ifndef SEQLAB_MODEL_HPP_
#define SEQLAB_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqlab/corpus.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/parameters.hpp"

namespace seqlab {

enum class EncoderKind { kNone, kWindowMlp, kBiRecurrent };
enum class HeadKind { kCrf, kSoftmax, kSoftmaxFocal };

const char *to_string(EncoderKind kind);
const char *to_string(HeadKind kind);
std::optional<EncoderKind> parse_encoder_kind(const std::string &s);
std::optional<HeadKind> parse_head_kind(const std::string &s);

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 32;
  EncoderKind encoder_kind = EncoderKind::kWindowMlp;
  std::size_t window_radius = 1;
  std::size_t hidden_dim = 64;
  HeadKind head_kind = HeadKind::kCrf;
  std::size_t num_labels = 0;
  double focal_gamma = 2.0;
  std::uint64_t init_seed = 0;
  double init_scale = 0.1;

  // Width of the vector fed to the emission projection.
  std::size_t feature_dim() const;
  // Throws ConfigError when a field is outside its domain.
  void validate() const;

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

// One training or evaluation example in index space.
struct LabeledSequence {
  std::vector<TokenId> token_ids;
  std::vector<Label> labels;
};

std::vector<LabeledSequence> to_sequences(const Corpus &corpus,
                                          std::size_t max_len = 0);

// Weights ~ uniform[-init_scale, init_scale]; biases and CRF scores zero.
ModelParameters init_parameters(const ModelConfig &config);

// Throws IndexError for ids >= vocab_size and ShapeError for empty input.
EmissionScores encode(const ModelParameters &params, const ModelConfig &config,
                      std::span<const TokenId> token_ids);

// Mean over positions of -(1 - p_t)^gamma * log p_t, p_t the softmax
// probability of the gold label. gamma = 0 is token cross-entropy.
double softmax_loss(const EmissionScores &emissions, std::span<const Label> tags,
                    double focal_gamma);

// Loss of one sentence under the configured head.
double sentence_loss(const ModelParameters &params, const ModelConfig &config,
                     const LabeledSequence &example);

struct LossAndGradient {
  double loss = 0.0;  // mean over the batch
  GradientSet gradient;
};

// Gradient of the batch-mean loss. Sentences are processed in parallel and
// their gradients summed in batch order, so the result does not depend on
// the thread count.
LossAndGradient compute_gradients(const ModelParameters &params,
                                  const ModelConfig &config,
                                  std::span<const LabeledSequence> batch);

// Single-threaded reference: accumulates every sentence straight into one
// gradient set. Agrees with compute_gradients up to summation order.
LossAndGradient compute_gradients_serial(const ModelParameters &params,
                                         const ModelConfig &config,
                                         std::span<const LabeledSequence> batch);

// Viterbi path for CRF heads, per-token argmax (first maximum) otherwise.
std::vector<Label> decode(const ModelParameters &params,
                          const ModelConfig &config,
                          std::span<const TokenId> token_ids);

std::vector<std::vector<Label>> decode_batch(
    const ModelParameters &params, const ModelConfig &config,
    std::span<const std::vector<TokenId>> inputs);

std::vector<std::vector<Label>> decode_batch_serial(
    const ModelParameters &params, const ModelConfig &config,
    std::span<const std::vector<TokenId>> inputs);

// Everything needed to tag new text.
struct Checkpoint {
  ModelConfig config;
  ModelParameters params;
  LabelVocabulary label_vocabulary;
  TokenVocabulary token_vocabulary;
};

// Binary container: magic, version, config, vocabularies and every parameter
// array with its name and shape. Doubles are stored as raw IEEE-754 bytes,
// so a write-then-read round trip is bit-exact.
void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

}  // namespace seqlab

#endif  // SEQLAB_MODEL_HPP_
