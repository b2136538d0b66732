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

// Sectioned key=value configuration files and per-run manifests.
//
//   # comment
//   [section]
//   key = value
//
// Keys are exact; an unknown section or key is an error.

#ifndef SEQLAB_CONFIG_HPP_
#define SEQLAB_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqlab/training.hpp"

namespace seqlab {

using IniSections = std::map<std::string, std::map<std::string, std::string>>;

// Throws ParseError on syntax errors and duplicate keys.
IniSections parse_ini(std::istream &in);

struct RunConfig {
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::optional<std::filesystem::path> test_path;
  std::vector<std::string> entity_types = LabelVocabulary::default_entity_types();
  ModelConfig model;
  OptimizerConfig optimizer;
  FgmConfig fgm;
  std::vector<std::uint64_t> seeds = {1};
  std::filesystem::path output_dir = "runs";

  RunConfigs configs() const { return {model, optimizer, fgm}; }
};

// Relative paths are resolved against `base_dir`. Throws ConfigError (or
// ParseError) on any malformed, unknown or out-of-domain entry. Does not
// check that the data files exist.
RunConfig parse_run_config(std::istream &in,
                           const std::filesystem::path &base_dir = {});
RunConfig load_run_config(const std::filesystem::path &path);

// Reads only what a model needs from a run-config file: [model] plus the
// entity types of [data]. Other sections are allowed but still checked for
// unknown keys; data paths are not required.
RunConfig load_model_config(const std::filesystem::path &path);

// Inverse of parse_run_config; paths are written as given.
std::string format_run_config(const RunConfig &config);

// One trained model: the configuration it was trained with, where its
// checkpoint lives and its final scores.
struct RunManifest {
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint;
  RunConfig config;
  double dev_micro_f1 = 0.0;
  double dev_macro_f1 = 0.0;
  double train_micro_f1 = 0.0;
  double final_train_loss = 0.0;
};

std::string format_manifest(const RunManifest &manifest);
void save_manifest(const std::filesystem::path &path,
                   const RunManifest &manifest);
// The checkpoint path is resolved against the manifest's directory.
RunManifest load_manifest(const std::filesystem::path &path);

}  // namespace seqlab

#endif  // SEQLAB_CONFIG_HPP_
