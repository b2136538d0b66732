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

#include "cli.hpp"

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "seqlab/config.hpp"
#include "seqlab/corpus.hpp"
#include "seqlab/ensemble.hpp"
#include "seqlab/error.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/gradcheck.hpp"
#include "seqlab/model.hpp"
#include "seqlab/training.hpp"

namespace seqlab::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<std::vector<std::string>> tags_of(const Corpus &c) {
  std::vector<std::vector<std::string>> out;
  out.reserve(c.size());
  for (const auto &s : c.sentences) out.push_back(s.tags);
  return out;
}

Corpus require_tagged(Corpus c, const fs::path &path) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c.sentences[i].labeled()) {
      throw ConfigError("'" + path.string() + "' sentence " + std::to_string(i) +
                        " has no tag column");
    }
  }
  return c;
}

LabelVocabulary label_vocab(const std::vector<std::string> &types) {
  return types.empty() ? LabelVocabulary() : LabelVocabulary(types);
}

void require_file(const fs::path &p, const std::string &what) {
  if (!fs::is_regular_file(p)) {
    throw ConfigError(what + " '" + p.string() + "' does not exist");
  }
}

}  // namespace

int cmd_train(const TrainArgs &args, std::ostream &out, std::ostream &err) {
  RunConfig config;
  Corpus train_corpus, dev_corpus;
  try {
    config = load_run_config(args.config);
    if (args.out) config.output_dir = *args.out;
    if (!args.seeds.empty()) config.seeds = args.seeds;
    if (args.epsilon) config.fgm.epsilon = *args.epsilon;
    if (args.no_fgm) config.fgm.enabled = false;
    {
      // Re-check overrides.
      std::istringstream again(format_run_config(config));
      config = parse_run_config(again);
    }
    require_file(config.train_path, "train file");
    require_file(config.dev_path, "dev file");
    const LabelVocabulary labels(config.entity_types);
    train_corpus = require_tagged(load_conll(config.train_path, labels),
                                  config.train_path);
    dev_corpus = require_tagged(load_conll(config.dev_path, labels),
                                config.dev_path);
    fs::create_directories(config.output_dir);
  } catch (const std::exception &e) {
    err << "seqlab train: " << e.what() << "\n";
    return kExitInputError;
  }

  std::vector<TrainRunResult> results;
  try {
    results = run_seeds(train_corpus, dev_corpus, config.configs(), config.seeds);
  } catch (const TrainingAborted &e) {
    err << "seqlab train: training aborted at " << e.what() << "\n";
    return kExitTrainingAbort;
  } catch (const std::exception &e) {
    err << "seqlab train: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    for (const auto &r : results) {
      const fs::path dir = config.output_dir / ("seed_" + std::to_string(r.seed));
      fs::create_directories(dir);
      const fs::path ckpt_path = dir / "model.ckpt";
      save_checkpoint(ckpt_path, {r.config, r.params, train_corpus.label_vocabulary,
                                  train_corpus.token_vocabulary});

      const auto dev_pred = predict_tags(r.params, r.config, dev_corpus,
                                         train_corpus.token_vocabulary);
      const auto dev_gold = tags_of(dev_corpus);
      const EvalReport dev_report =
          evaluate(dev_gold, dev_pred, train_corpus.label_vocabulary);
      const auto train_pred = predict_tags(r.params, r.config, train_corpus,
                                           train_corpus.token_vocabulary);
      const auto train_gold = tags_of(train_corpus);
      const EvalReport train_report =
          evaluate(train_gold, train_pred, train_corpus.label_vocabulary);

      RunManifest manifest;
      manifest.seed = r.seed;
      manifest.checkpoint = fs::absolute(ckpt_path);
      manifest.config = config;
      manifest.config.seeds = {r.seed};
      manifest.dev_micro_f1 = dev_report.micro_f1;
      manifest.dev_macro_f1 = dev_report.macro_f1;
      manifest.train_micro_f1 = train_report.micro_f1;
      manifest.final_train_loss =
          r.history.empty() ? 0.0 : r.history.back().train_loss;
      save_manifest(dir / "manifest.txt", manifest);

      out << "seed " << r.seed << ": dev micro-F1 "
          << fixed(100.0 * dev_report.micro_f1, 2) << "%, macro-F1 "
          << fixed(100.0 * dev_report.macro_f1, 2) << "%\n";
      if (!args.quiet) {
        for (const auto &h : r.history) {
          out << "  epoch " << h.epoch << "  loss " << fixed(h.train_loss, 6)
              << "  dev micro-F1 " << fixed(100.0 * h.dev_micro_f1, 2) << "%\n";
        }
        out << format_report(dev_report);
      }
    }
  } catch (const std::exception &e) {
    err << "seqlab train: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_predict(const PredictArgs &args, std::ostream &out, std::ostream &err) {
  try {
    const Checkpoint ckpt = load_checkpoint(args.checkpoint);
    require_file(args.input, "input file");
    Corpus input =
        load_conll(args.input, ckpt.label_vocabulary, ckpt.token_vocabulary);
    const auto tags =
        predict_tags(ckpt.params, ckpt.config, input, ckpt.token_vocabulary);
    for (std::size_t i = 0; i < input.size(); ++i) input.sentences[i].tags = tags[i];
    save_conll(args.output, input.sentences);
    out << "wrote " << input.size() << " sentences to " << args.output.string()
        << "\n";
  } catch (const std::exception &e) {
    err << "seqlab predict: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_ensemble(const EnsembleArgs &args, std::ostream &out, std::ostream &err) {
  try {
    LabelVocabulary labels = label_vocab(args.entity_types);
    std::vector<std::vector<std::vector<std::string>>> per_model;
    std::vector<Sentence> base;

    if (!args.manifests.empty()) {
      if (!args.predictions.empty()) {
        throw ConfigError("give prediction files or manifests, not both");
      }
      if (!args.input) throw ConfigError("--input is required with manifests");
      require_file(*args.input, "input file");
      for (std::size_t m = 0; m < args.manifests.size(); ++m) {
        const RunManifest manifest = load_manifest(args.manifests[m]);
        const Checkpoint ckpt = load_checkpoint(manifest.checkpoint);
        if (m == 0) {
          labels = ckpt.label_vocabulary;
          base = load_conll(*args.input, labels).sentences;
        } else if (!(ckpt.label_vocabulary == labels)) {
          throw ConfigError("'" + args.manifests[m].string() +
                            "' uses a different label set");
        }
        Corpus input = load_conll(*args.input, labels, ckpt.token_vocabulary);
        per_model.push_back(
            predict_tags(ckpt.params, ckpt.config, input, ckpt.token_vocabulary));
      }
    } else {
      if (args.predictions.empty()) throw ConfigError("no prediction files given");
      for (std::size_t m = 0; m < args.predictions.size(); ++m) {
        const fs::path &path = args.predictions[m];
        require_file(path, "prediction file");
        Corpus c = require_tagged(load_conll(path, labels), path);
        if (m == 0) {
          base = c.sentences;
        } else {
          if (c.size() != base.size()) {
            throw AlignmentError(std::min(c.size(), base.size()),
                                 "'" + path.string() + "' has " +
                                     std::to_string(c.size()) +
                                     " sentences, expected " +
                                     std::to_string(base.size()));
          }
          for (std::size_t s = 0; s < c.size(); ++s) {
            if (c.sentences[s].tokens != base[s].tokens) {
              throw AlignmentError(
                  s, "token column of '" + path.string() +
                         "' differs from '" + args.predictions[0].string() + "'");
            }
          }
        }
        per_model.push_back(tags_of(c));
      }
    }

    VoteSummary summary;
    const auto tags =
        ensemble_predict(PredictionSet::from_models(per_model), labels, summary);
    for (std::size_t s = 0; s < base.size(); ++s) base[s].tags = tags[s];
    save_conll(args.output, base);
    out << "k=" << summary.k << " sentences=" << summary.sentences
        << " candidate_spans=" << summary.candidate_spans
        << " majority_spans=" << summary.majority_spans
        << " unanimous_spans=" << summary.unanimous_spans
        << " kept_spans=" << summary.kept_spans << "\n";
    if (!args.quiet && summary.sentences > 0) {
      out << "mean candidates/sentence "
          << fixed(static_cast<double>(summary.candidate_spans) /
                       static_cast<double>(summary.sentences), 3)
          << ", kept/sentence "
          << fixed(static_cast<double>(summary.kept_spans) /
                       static_cast<double>(summary.sentences), 3)
          << "\n";
    }
  } catch (const std::exception &e) {
    err << "seqlab ensemble: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_eval(const EvalArgs &args, std::ostream &out, std::ostream &err) {
  try {
    const LabelVocabulary labels = label_vocab(args.entity_types);
    require_file(args.gold, "gold file");
    require_file(args.pred, "prediction file");
    const Corpus gold = require_tagged(load_conll(args.gold, labels), args.gold);
    const Corpus pred = require_tagged(load_conll(args.pred, labels), args.pred);
    if (gold.size() != pred.size()) {
      throw AlignmentError(std::min(gold.size(), pred.size()),
                           "gold has " + std::to_string(gold.size()) +
                               " sentences, prediction has " +
                               std::to_string(pred.size()));
    }
    for (std::size_t s = 0; s < gold.size(); ++s) {
      if (gold.sentences[s].tokens != pred.sentences[s].tokens) {
        throw AlignmentError(s, "token columns differ");
      }
    }
    const EvalReport report = evaluate(tags_of(gold), tags_of(pred), labels);
    out << format_report(report);
    if (args.report_file) save_report_tsv(*args.report_file, report);
  } catch (const std::exception &e) {
    err << "seqlab eval: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_gradcheck(const GradcheckArgs &args, std::ostream &out,
                  std::ostream &err) {
  ModelConfig base;
  std::vector<EncoderKind> encoders = {EncoderKind::kNone, EncoderKind::kWindowMlp,
                                       EncoderKind::kBiRecurrent};
  std::vector<HeadKind> heads = {HeadKind::kCrf, HeadKind::kSoftmax,
                                 HeadKind::kSoftmaxFocal};
  try {
    std::size_t num_labels = LabelVocabulary().size();
    if (args.config) {
      const RunConfig rc = load_model_config(*args.config);
      base = rc.model;
      num_labels = LabelVocabulary(rc.entity_types).size();
    }
    base.num_labels = num_labels;
    if (args.encoder) {
      auto k = parse_encoder_kind(*args.encoder);
      if (!k) throw ConfigError("unknown encoder '" + *args.encoder + "'");
      encoders = {*k};
    }
    if (args.head) {
      auto k = parse_head_kind(*args.head);
      if (!k) throw ConfigError("unknown head '" + *args.head + "'");
      heads = {*k};
    }
    if (args.corrupt_array) {
      bool known = false;
      for (const auto &info : kParameterArrays) known |= info.name == *args.corrupt_array;
      if (!known) throw ConfigError("unknown array '" + *args.corrupt_array + "'");
    }
  } catch (const std::exception &e) {
    err << "seqlab gradcheck: " << e.what() << "\n";
    return kExitInputError;
  }

  GradcheckOptions options;
  options.instances = args.instances;
  options.seed = args.seed;
  if (args.corrupt_array) {
    const std::string target = *args.corrupt_array;
    options.corrupt = [target](GradientSet &g) {
      for_each_array(
          [&](const ArrayInfo &info, Matrix &m) {
            if (info.name == target && !m.empty()) m.values()[0] += 1e-2;
          },
          g);
    };
  }

  std::vector<std::string> failures;
  for (EncoderKind enc : encoders) {
    for (HeadKind head : heads) {
      ModelConfig c = base;
      c.encoder_kind = enc;
      c.head_kind = head;
      const GradcheckResult r = run_gradcheck(c, options);
      const std::string combo =
          std::string(to_string(enc)) + "+" + to_string(head);
      if (!args.quiet) out << combo << "\n";
      for (const auto &a : r.arrays) {
        const bool ok = a.max_relative_error <= options.tolerance;
        if (!args.quiet || !ok) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "  %-28s max rel err %.3e  %s\n",
                        a.name.c_str(), a.max_relative_error, ok ? "ok" : "FAIL");
          out << buf;
        }
        if (!ok) failures.push_back(combo + ":" + a.name);
      }
    }
  }
  if (!failures.empty()) {
    err << "seqlab gradcheck: tolerance exceeded in";
    for (const auto &f : failures) err << " " << f;
    err << "\n";
    return kExitGradcheckFailure;
  }
  out << "gradcheck passed (" << encoders.size() * heads.size()
      << " configurations, " << options.instances << " instances each)\n";
  return kExitOk;
}

int cmd_synth(const SynthArgs &args, std::ostream &out, std::ostream &err) {
  try {
    if (args.dev_sentences > 0 && !args.dev_out) {
      throw ConfigError("--dev-out is required with --dev-sentences");
    }
    const Corpus corpus = make_synthetic_corpus(
        args.seed, args.sentences + args.dev_sentences, args.vocab);
    std::span<const Sentence> all(corpus.sentences);
    save_conll(args.out, all.first(args.sentences));
    out << "wrote " << args.sentences << " sentences to " << args.out.string()
        << "\n";
    if (args.dev_sentences > 0) {
      save_conll(*args.dev_out, all.subspan(args.sentences));
      out << "wrote " << args.dev_sentences << " sentences to "
          << args.dev_out->string() << "\n";
    }
  } catch (const std::exception &e) {
    err << "seqlab synth: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

void apply_thread_limit() {
  const char *env = std::getenv("SEQLAB_THREADS");
  if (env == nullptr) return;
  char *end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end != env && *end == '\0' && n > 0) omp_set_num_threads(static_cast<int>(n));
}

int run(int argc, char **argv) {
  apply_thread_limit();
  CLI::App app{"seqlab: sequence labeling with CRF heads, FGM training and "
               "span-vote ensembles"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet,-q", quiet, "Less output");

  TrainArgs train;
  auto *train_cmd = app.add_subcommand("train", "Train one model per seed");
  train_cmd->add_option("--config,-c", train.config, "Run config file")->required();
  train_cmd->add_option("--out,-o", train.out, "Output directory (overrides run.output_dir)");
  std::uint64_t single_seed = 0;
  auto *seed_opt = train_cmd->add_option("--seed", single_seed, "Train a single seed");
  train_cmd->add_option("--seeds", train.seeds, "Comma-separated seeds")
      ->delimiter(',')
      ->excludes(seed_opt);
  train_cmd->add_option("--epsilon", train.epsilon, "FGM epsilon");
  train_cmd->add_flag("--no-fgm", train.no_fgm, "Disable adversarial training");
  train_cmd->add_flag("--quiet,-q", train.quiet, "Only print summary lines");

  PredictArgs predict;
  auto *predict_cmd = app.add_subcommand("predict", "Tag a CoNLL file");
  predict_cmd->add_option("checkpoint", predict.checkpoint, "Model checkpoint")->required();
  predict_cmd->add_option("input", predict.input, "Input CoNLL file")->required();
  predict_cmd->add_option("--out,-o", predict.output, "Output CoNLL file")->required();

  EnsembleArgs ensemble;
  auto *ensemble_cmd =
      app.add_subcommand("ensemble", "Majority-vote several predictions");
  ensemble_cmd->add_option("predictions", ensemble.predictions,
                           "Prediction files with identical token columns");
  ensemble_cmd->add_option("--manifest", ensemble.manifests,
                           "Run manifests (repeatable); requires --input");
  ensemble_cmd->add_option("--input", ensemble.input, "Input to tag with --manifest");
  ensemble_cmd->add_option("--out,-o", ensemble.output, "Output CoNLL file")->required();
  ensemble_cmd->add_option("--types", ensemble.entity_types, "Entity types")
      ->delimiter(',');
  ensemble_cmd->add_flag("--quiet,-q", ensemble.quiet, "Only print the summary");

  EvalArgs eval;
  auto *eval_cmd = app.add_subcommand("eval", "Score predictions against gold");
  eval_cmd->add_option("gold", eval.gold, "Gold CoNLL file")->required();
  eval_cmd->add_option("pred", eval.pred, "Predicted CoNLL file")->required();
  eval_cmd->add_option("--report-file", eval.report_file, "Also write a TSV report");
  eval_cmd->add_option("--types", eval.entity_types, "Entity types")->delimiter(',');

  GradcheckArgs grad;
  auto *grad_cmd =
      app.add_subcommand("gradcheck", "Compare gradients with finite differences");
  grad_cmd->add_option("--config,-c", grad.config, "Config file ([model] is read)");
  grad_cmd->add_option("--encoder", grad.encoder, "Only this encoder kind");
  grad_cmd->add_option("--head", grad.head, "Only this head kind");
  grad_cmd->add_option("--instances", grad.instances, "Random instances per pair");
  grad_cmd->add_option("--seed", grad.seed, "Instance generator seed");
  grad_cmd->add_option("--corrupt-array", grad.corrupt_array)->group("");
  grad_cmd->add_flag("--quiet,-q", grad.quiet, "Only print failures");

  SynthArgs synth;
  auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--sentences", synth.sentences, "Training sentences");
  synth_cmd->add_option("--vocab", synth.vocab, "Lexicon size (>= 20)");
  synth_cmd->add_option("--out,-o", synth.out, "Output CoNLL file")->required();
  synth_cmd->add_option("--dev-sentences", synth.dev_sentences,
                        "Extra sentences written to --dev-out");
  synth_cmd->add_option("--dev-out", synth.dev_out, "Dev CoNLL file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  if (*train_cmd) {
    if (seed_opt->count() > 0) train.seeds = {single_seed};
    train.quiet = train.quiet || quiet;
    return cmd_train(train, std::cout, std::cerr);
  }
  if (*predict_cmd) return cmd_predict(predict, std::cout, std::cerr);
  if (*ensemble_cmd) {
    ensemble.quiet = ensemble.quiet || quiet;
    return cmd_ensemble(ensemble, std::cout, std::cerr);
  }
  if (*eval_cmd) return cmd_eval(eval, std::cout, std::cerr);
  if (*grad_cmd) {
    grad.quiet = grad.quiet || quiet;
    return cmd_gradcheck(grad, std::cout, std::cerr);
  }
  if (*synth_cmd) return cmd_synth(synth, std::cout, std::cerr);
  return kExitInputError;
}

}  // namespace seqlab::cli
