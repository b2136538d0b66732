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

// Central finite-difference check of compute_gradients.

#ifndef SEQLAB_GRADCHECK_HPP_
#define SEQLAB_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqlab/model.hpp"

namespace seqlab {

struct GradcheckOptions {
  std::size_t instances = 20;
  std::uint64_t seed = 1;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error, so entries whose true value is
  // ~0 are judged on absolute error.
  double floor = 1e-6;
  // Test hook: may modify the analytic gradient before comparison.
  std::function<void(GradientSet &)> corrupt;
};

struct ArrayError {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t entries = 0;
};

struct GradcheckResult {
  ModelConfig config;
  std::vector<ArrayError> arrays;  // arrays in use, fixed order

  double max_error() const;
  bool passed(double tolerance) const;
};

// |a - n| / max(|a|, |n|, floor); non-finite results map to HUGE_VAL.
double relative_error(double analytic, double numeric, double floor);

// Random small instances (vocabulary 7, dims from `base` capped at 4, 1-5
// tokens, all arrays ~ uniform[-0.5, 0.5]) for one encoder/head pair.
GradcheckResult run_gradcheck(const ModelConfig &base,
                              const GradcheckOptions &options);

}  // namespace seqlab

#endif  // SEQLAB_GRADCHECK_HPP_
