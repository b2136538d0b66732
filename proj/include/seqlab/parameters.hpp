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

#ifndef SEQLAB_PARAMETERS_HPP_
#define SEQLAB_PARAMETERS_HPP_

#include <array>
#include <cstddef>
#include <string_view>

#include "seqlab/matrix.hpp"

namespace seqlab {

enum class ParameterGroup { kEncoder, kCrf };

// Every trainable array of a model. Arrays that the configured encoder or
// head does not use are left empty (0x0). The same layout doubles as the
// gradient container and as optimizer moment storage.
struct ParameterSet {
  Matrix embedding;                   // vocab x embedding_dim
  Matrix hidden_weights;              // window: (2r+1)E x H; recurrent: E x H
  Matrix hidden_bias;                 // 1 x H
  Matrix recurrent_weights;           // H x H (forward direction)
  Matrix backward_input_weights;      // E x H
  Matrix backward_recurrent_weights;  // H x H
  Matrix backward_bias;               // 1 x H
  Matrix emission_weights;            // feature_dim x K
  Matrix emission_bias;               // 1 x K
  Matrix crf_transitions;             // K x K, [from, to]
  Matrix crf_start;                   // 1 x K
  Matrix crf_stop;                    // 1 x K

  friend bool operator==(const ParameterSet &, const ParameterSet &) = default;
};

using ModelParameters = ParameterSet;
using GradientSet = ParameterSet;

struct ArrayInfo {
  std::string_view name;
  Matrix ParameterSet::*member;
  ParameterGroup group;
};

inline constexpr std::array<ArrayInfo, 12> kParameterArrays = {{
    {"embedding", &ParameterSet::embedding, ParameterGroup::kEncoder},
    {"hidden_weights", &ParameterSet::hidden_weights, ParameterGroup::kEncoder},
    {"hidden_bias", &ParameterSet::hidden_bias, ParameterGroup::kEncoder},
    {"recurrent_weights", &ParameterSet::recurrent_weights,
     ParameterGroup::kEncoder},
    {"backward_input_weights", &ParameterSet::backward_input_weights,
     ParameterGroup::kEncoder},
    {"backward_recurrent_weights", &ParameterSet::backward_recurrent_weights,
     ParameterGroup::kEncoder},
    {"backward_bias", &ParameterSet::backward_bias, ParameterGroup::kEncoder},
    {"emission_weights", &ParameterSet::emission_weights,
     ParameterGroup::kEncoder},
    {"emission_bias", &ParameterSet::emission_bias, ParameterGroup::kEncoder},
    {"crf_transitions", &ParameterSet::crf_transitions, ParameterGroup::kCrf},
    {"crf_start", &ParameterSet::crf_start, ParameterGroup::kCrf},
    {"crf_stop", &ParameterSet::crf_stop, ParameterGroup::kCrf},
}};

// Calls fn(info, a.*member, b.*member ...) for every array, in a fixed order.
template <typename Fn, typename... Sets>
void for_each_array(Fn &&fn, Sets &&...sets) {
  for (const auto &info : kParameterArrays) {
    fn(info, (sets.*(info.member))...);
  }
}

// Same shapes as `like`, all zeros.
ParameterSet zeros_like(const ParameterSet &like);

bool same_shapes(const ParameterSet &a, const ParameterSet &b);

// a += scale * b
void add_scaled(ParameterSet &a, const ParameterSet &b, double scale = 1.0);

void scale(ParameterSet &a, double factor);

// L2 norm over every entry of every array.
double global_norm(const ParameterSet &a);

bool all_finite(const ParameterSet &a);

}  // namespace seqlab

#endif  // SEQLAB_PARAMETERS_HPP_
