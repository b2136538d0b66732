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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "seqlab/config.hpp"
#include "seqlab/error.hpp"

using namespace seqlab;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string &text, const fs::path &base = {}) {
  std::istringstream in(text);
  return parse_run_config(in, base);
}

const char *kMinimal = "[data]\ntrain = t.conll\ndev = d.conll\n";

}  // namespace

TEST_CASE("parse_ini") {
  std::istringstream in(
      "# comment\n[a]\nx = 1\n  y=two words  \n\n[b]\nz = # trailing\n");
  const IniSections ini = parse_ini(in);
  CHECK(ini.at("a").at("x") == "1");
  CHECK(ini.at("a").at("y") == "two words");
  CHECK(ini.at("b").at("z").empty());
  std::istringstream dup("[a]\nx = 1\nx = 2\n");
  CHECK_THROWS_AS(parse_ini(dup), ParseError);
  std::istringstream orphan("x = 1\n");
  CHECK_THROWS_AS(parse_ini(orphan), ParseError);
  std::istringstream junk("[a]\nnot a pair\n");
  CHECK_THROWS_AS(parse_ini(junk), ParseError);
}

TEST_CASE("defaults and full parse") {
  const RunConfig d = parse(kMinimal, "/base");
  CHECK(d.train_path == fs::path("/base/t.conll"));
  CHECK(d.model.embedding_dim == 32);
  CHECK(d.model.encoder_kind == EncoderKind::kWindowMlp);
  CHECK(d.model.head_kind == HeadKind::kCrf);
  CHECK(d.optimizer.crf_lr_multiplier == 100.0);
  CHECK(d.optimizer.warmup_ratio == 0.1);
  CHECK(d.optimizer.grad_clip_norm == 1.0);
  CHECK(d.fgm.enabled);
  CHECK(d.fgm.epsilon == 1.0);
  CHECK(d.seeds == std::vector<std::uint64_t>{1});
  CHECK(d.entity_types.size() == 6);

  const RunConfig c = parse(std::string(kMinimal) +
                            "test = /abs/x.conll\nentity_types = A, B\n"
                            "[model]\nencoder_kind = bi_recurrent\nhead_kind = "
                            "softmax_focal\nfocal_gamma = 1.5\nhidden_dim = 7\n"
                            "[optimizer]\nbase_lr = 0.003\ngrad_clip_norm = none\n"
                            "epochs = 4\n[fgm]\nenabled = false\nepsilon = 0.5\n"
                            "[run]\nseeds = 1, 2, 3\noutput_dir = out\n",
                            "/base");
  CHECK(c.test_path == fs::path("/abs/x.conll"));
  CHECK(c.entity_types == std::vector<std::string>{"A", "B"});
  CHECK(c.model.encoder_kind == EncoderKind::kBiRecurrent);
  CHECK(c.model.head_kind == HeadKind::kSoftmaxFocal);
  CHECK(c.model.focal_gamma == 1.5);
  CHECK(c.model.hidden_dim == 7);
  CHECK(c.optimizer.base_lr == 0.003);
  CHECK_FALSE(c.optimizer.grad_clip_norm.has_value());
  CHECK(c.optimizer.epochs == 4);
  CHECK_FALSE(c.fgm.enabled);
  CHECK(c.fgm.epsilon == 0.5);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.output_dir == fs::path("/base/out"));

  const RunConfig again = parse(format_run_config(c));
  CHECK(format_run_config(again) == format_run_config(c));
  CHECK(again.model == c.model);
  CHECK(again.optimizer.base_lr == c.optimizer.base_lr);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("[data]\ntrain = a\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "[nope]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "[model]\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "[model]\nencoder_kind = lstm\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "[optimizer]\nbase_lr = fast\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "[optimizer]\nepochs = -1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "[optimizer]\nwarmup_ratio = 1.5\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "[run]\nseeds = 1, 1\n"), ConfigError);
  CHECK_THROWS_AS(parse(std::string(kMinimal) + "[fgm]\nenabled = maybe\n"),
                  ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("manifest round trip resolves the checkpoint path") {
  const fs::path dir = fs::temp_directory_path() / "seqlab_manifest_test";
  fs::create_directories(dir);
  RunManifest m;
  m.seed = 4;
  m.checkpoint = "model.ckpt";
  m.config = parse(kMinimal, "/data");
  m.config.seeds = {4};
  m.dev_micro_f1 = 0.1 + 0.2;
  m.dev_macro_f1 = 0.5;
  m.train_micro_f1 = 1.0;
  m.final_train_loss = 1e-5;
  save_manifest(dir / "manifest.txt", m);
  const RunManifest back = load_manifest(dir / "manifest.txt");
  CHECK(back.seed == 4);
  CHECK(back.checkpoint == dir / "model.ckpt");
  CHECK(back.dev_micro_f1 == m.dev_micro_f1);
  CHECK(back.final_train_loss == m.final_train_loss);
  CHECK(back.config.train_path == fs::path("/data/t.conll"));
  fs::remove_all(dir);
}
