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

// Subcommands of the seqlab executable. Each returns a process exit status.

#ifndef SEQLAB_TOOLS_CLI_HPP_
#define SEQLAB_TOOLS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace seqlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitTrainingAbort = 3;
inline constexpr int kExitGradcheckFailure = 4;

struct TrainArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::vector<std::uint64_t> seeds;  // overrides run.seeds when non-empty
  std::optional<double> epsilon;
  bool no_fgm = false;
  bool quiet = false;
};

struct PredictArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path output;
};

struct EnsembleArgs {
  std::vector<std::filesystem::path> predictions;
  std::vector<std::filesystem::path> manifests;
  std::optional<std::filesystem::path> input;  // required with manifests
  std::filesystem::path output;
  std::vector<std::string> entity_types;  // empty: default types
  bool quiet = false;
};

struct EvalArgs {
  std::filesystem::path gold;
  std::filesystem::path pred;
  std::optional<std::filesystem::path> report_file;
  std::vector<std::string> entity_types;
};

struct GradcheckArgs {
  std::optional<std::filesystem::path> config;
  std::optional<std::string> encoder;  // restrict to one encoder kind
  std::optional<std::string> head;     // restrict to one head kind
  std::size_t instances = 20;
  std::uint64_t seed = 1;
  std::optional<std::string> corrupt_array;  // negative-control hook
  bool quiet = false;
};

struct SynthArgs {
  std::uint64_t seed = 1;
  std::size_t sentences = 500;
  std::size_t vocab = 200;
  std::filesystem::path out;
  std::size_t dev_sentences = 0;
  std::optional<std::filesystem::path> dev_out;
};

int cmd_train(const TrainArgs &args, std::ostream &out, std::ostream &err);
int cmd_predict(const PredictArgs &args, std::ostream &out, std::ostream &err);
int cmd_ensemble(const EnsembleArgs &args, std::ostream &out, std::ostream &err);
int cmd_eval(const EvalArgs &args, std::ostream &out, std::ostream &err);
int cmd_gradcheck(const GradcheckArgs &args, std::ostream &out,
                  std::ostream &err);
int cmd_synth(const SynthArgs &args, std::ostream &out, std::ostream &err);

// Applies SEQLAB_THREADS (if set to a positive integer) to the OpenMP
// runtime.
void apply_thread_limit();

// Full command-line entry point.
int run(int argc, char **argv);

}  // namespace seqlab::cli

#endif  // SEQLAB_TOOLS_CLI_HPP_
