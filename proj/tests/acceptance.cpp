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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "eval_fixture.hpp"
#include "oracles.hpp"
#include "seqlab/crf.hpp"
#include "seqlab/ensemble.hpp"
#include "seqlab/eval.hpp"
#include "seqlab/gradcheck.hpp"
#include "seqlab/random.hpp"
#include "seqlab/training.hpp"

using namespace seqlab;

namespace {

using Clock = std::chrono::steady_clock;
using Tags = std::vector<std::string>;

// Tags rebuilt from oracle spans: the repaired form of `tags`.
Tags oracle_repaired(const Tags &tags) {
  Tags out(tags.size(), "O");
  for (const auto &s : oracle::spans(tags)) {
    out[s.start] = "B-" + s.etype;
    for (std::size_t i = s.start + 1; i < s.end; ++i) out[i] = "I-" + s.etype;
  }
  return out;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok && pass) detail = "failed: " + what;
    pass = pass && ok;
  }
};

std::string fmt(const char *f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// 1. CRF oracle equivalence.
Outcome crf_oracle() {
  Outcome o;
  const auto start = Clock::now();
  Rng rng(2026);
  double worst = 0.0;
  const int instances = 1500;
  for (int i = 0; i < instances; ++i) {
    const std::size_t n = rng.between(1, 5), k = rng.between(1, 4);
    EmissionScores em{Matrix(n, k)};
    ModelParameters p;
    p.crf_transitions = Matrix(k, k);
    p.crf_start = Matrix(1, k);
    p.crf_stop = Matrix(1, k);
    for (Matrix *m : {&em.scores, &p.crf_transitions, &p.crf_start, &p.crf_stop}) {
      for (double &v : m->values()) v = rng.uniform(-2.0, 2.0);
    }
    std::vector<Label> y(n);
    for (auto &l : y) l = rng.below(k);
    const oracle::Crf crf = oracle::make_crf(em.scores, p);
    const oracle::Enumeration e = oracle::enumerate(crf);
    const std::vector<std::size_t> yy(y.begin(), y.end());

    const double dz = std::abs(crf_log_partition(em, p) - e.log_z);
    const double dn = std::abs(crf_nll(em, p, y) - (e.log_z - oracle::path_score(crf, yy)));
    worst = std::max({worst, dz, dn});
    o.require(dz <= 1e-9, "log partition");
    o.require(dn <= 1e-9, "nll");
    const auto path = viterbi_decode(em, p).path;
    o.require(std::equal(path.begin(), path.end(), e.best.begin(), e.best.end()),
              "viterbi argmax");
    const Matrix marg = crf_marginals(em, p);
    for (std::size_t t = 0; t < n; ++t) {
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        sum += marg(t, j);
        worst = std::max(worst, std::abs(marg(t, j) - e.marginals[t][j]));
        o.require(std::abs(marg(t, j) - e.marginals[t][j]) <= 1e-9, "marginals");
      }
      o.require(std::abs(sum - 1.0) <= 1e-9, "marginal rows sum to 1");
    }
  }
  const double secs = seconds_since(start);
  o.require(secs < 30.0, "runtime");
  if (o.pass) {
    o.detail = std::to_string(instances) + " instances, max abs err " +
               fmt("%.1e", worst) + ", " + fmt("%.2f", secs) + " s";
  }
  return o;
}

// 2. Gradient check over every encoder x head pair.
Outcome gradient_check() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  GradcheckOptions opts;
  opts.instances = 20;
  opts.step = 1e-5;
  for (auto enc : {EncoderKind::kNone, EncoderKind::kWindowMlp,
                   EncoderKind::kBiRecurrent}) {
    for (auto head : {HeadKind::kCrf, HeadKind::kSoftmax, HeadKind::kSoftmaxFocal}) {
      ModelConfig c;
      c.encoder_kind = enc;
      c.head_kind = head;
      c.num_labels = 5;
      const GradcheckResult r = run_gradcheck(c, opts);
      worst = std::max(worst, r.max_error());
      o.require(r.max_error() <= 1e-4,
                std::string(to_string(enc)) + "+" + to_string(head));
    }
  }
  const double secs = seconds_since(start);
  o.require(secs < 60.0, "runtime");
  if (o.pass) {
    o.detail = "9 pairs x 20 instances, max rel err " + fmt("%.2e", worst) + ", " +
               fmt("%.2f", secs) + " s";
  }
  return o;
}

// 3. FGM contract.
Outcome fgm_contract() {
  Outcome o;
  Rng rng(3);
  for (double eps : {0.1, 1.0, 5.0}) {
    Matrix g(17, 6);
    for (double &v : g.values()) v = rng.uniform(-1.0, 1.0);
    const auto d = fgm_perturbation(g, eps);
    o.require(d.has_value(), "perturbation exists");
    double sq = 0.0;
    for (double v : d->values()) sq += v * v;
    o.require(std::abs(std::sqrt(sq) - eps) <= 1e-9, "perturbation norm");
  }

  ModelConfig c;
  c.vocab_size = 12;
  c.embedding_dim = 4;
  c.hidden_dim = 6;
  c.num_labels = 5;
  c.init_scale = 0.3;
  c.init_seed = 8;
  std::vector<LabeledSequence> batch(3);
  for (auto &ex : batch) {
    const std::size_t n = rng.between(2, 8);
    for (std::size_t t = 0; t < n; ++t) {
      ex.token_ids.push_back(rng.below(c.vocab_size));
      ex.labels.push_back(rng.below(c.num_labels));
    }
  }
  OptimizerConfig oc;
  {
    // Step 0 has learning rate 0: the FGM step must leave every bit intact.
    ModelParameters p = init_parameters(c);
    const ModelParameters before = p;
    AdamState st = AdamState::for_parameters(p);
    train_step(p, c, oc, st, batch, {true, 1.0}, 0, 100);
    o.require(p == before, "embedding restore");
  }
  {
    ModelConfig z = c;
    z.init_scale = 0.0;
    const ModelParameters start = init_parameters(z);
    o.require(!fgm_perturbation(compute_gradients(start, z, batch).gradient.embedding,
                                1.0)
                   .has_value(),
              "zero gradient skip");
    ModelParameters a = start, b = start;
    AdamState sa = AdamState::for_parameters(start), sb = sa;
    const double la = train_step(a, z, oc, sa, batch, {true, 1.0}, 20, 100);
    const double lb = train_step(b, z, oc, sb, batch, {false, 1.0}, 20, 100);
    o.require(la == lb && a == b, "skip path equals FGM-disabled step");
  }
  if (o.pass) o.detail = "norms for eps 0.1/1/5, bit-exact restore, skip path";
  return o;
}

// 4. Schedule and parameter groups.
Outcome schedule_contract() {
  Outcome o;
  OptimizerConfig oc;
  oc.warmup_ratio = 0.1;
  const double peak = oc.base_lr;
  const auto enc = [&](std::size_t s) {
    return lr_at_step(oc, ParameterGroup::kEncoder, s, 100);
  };
  o.require(enc(10) == peak, "lr(10) = peak");
  o.require(enc(5) == 0.5 * peak, "lr(5) = peak / 2");
  o.require(enc(100) == 0.0, "lr(100) = 0");
  for (std::size_t s = 0; s <= 100; ++s) {
    const double e = enc(s);
    const double crf = lr_at_step(oc, ParameterGroup::kCrf, s, 100);
    o.require(crf == 100.0 * e, "crf = 100 x encoder");
    if (e > 0.0) {
      o.require(std::abs(crf / e - 100.0) <= 100.0 * std::numeric_limits<double>::epsilon(),
                "quotient within one ulp of 100");
    }
  }
  if (o.pass) o.detail = "peak at 10, half at 5, zero at 100, crf/encoder = 100";
  return o;
}

struct SyntheticSplit {
  Corpus train, dev;
};

SyntheticSplit synthetic_split() {
  const Corpus all = make_synthetic_corpus(1, 600, 200);
  SyntheticSplit s{all, all};
  s.train.sentences.assign(all.sentences.begin(), all.sentences.begin() + 500);
  s.dev.sentences.assign(all.sentences.begin() + 500, all.sentences.end());
  return s;
}

std::vector<Tags> gold_tags(const Corpus &c) {
  std::vector<Tags> out;
  for (const auto &s : c.sentences) out.push_back(s.tags);
  return out;
}

double dev_f1(const TrainRunResult &r, const SyntheticSplit &d) {
  const auto pred = predict_tags(r.params, r.config, d.dev, d.train.token_vocabulary);
  return evaluate(gold_tags(d.dev), pred, d.train.label_vocabulary).micro_f1;
}

ModelConfig end_to_end_model() {
  ModelConfig m;
  m.encoder_kind = EncoderKind::kWindowMlp;
  m.head_kind = HeadKind::kCrf;
  return m;
}

OptimizerConfig end_to_end_optimizer() {
  OptimizerConfig o;
  o.batch_size = 8;
  o.epochs = 30;
  return o;
}

// 5. Synthetic end to end.
Outcome end_to_end(const SyntheticSplit &data, TrainRunResult &seed1) {
  Outcome o;
  const auto start = Clock::now();
  seed1 = train(data.train, data.dev, end_to_end_model(), end_to_end_optimizer(),
                FgmConfig{}, 1);
  const double secs = seconds_since(start);
  const double f1 = dev_f1(seed1, data);
  o.require(f1 >= 0.95, "dev micro-F1 " + fmt("%.4f", f1) + " < 0.95");
  o.require(secs < 120.0, "wall time " + fmt("%.1f", secs) + " s");
  if (o.pass) {
    o.detail = "dev micro-F1 " + fmt("%.4f", f1) + " in " + fmt("%.1f", secs) + " s";
  }
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 6. Relative claims: ensemble vs median seed, FGM vs no FGM.
Outcome relative_claims(const SyntheticSplit &data, const TrainRunResult &seed1) {
  Outcome o;
  const std::vector<std::uint64_t> rest{2, 3, 4, 5};
  std::vector<TrainRunResult> runs{seed1};
  for (auto &r : run_seeds(data.train, data.dev,
                           {end_to_end_model(), end_to_end_optimizer(), FgmConfig{}},
                           rest)) {
    runs.push_back(std::move(r));
  }
  std::vector<double> single;
  std::vector<std::vector<Tags>> per_model;
  for (const auto &r : runs) {
    per_model.push_back(
        predict_tags(r.params, r.config, data.dev, data.train.token_vocabulary));
    single.push_back(
        evaluate(gold_tags(data.dev), per_model.back(), data.train.label_vocabulary)
            .micro_f1);
  }
  const auto voted = ensemble_predict(PredictionSet::from_models(per_model),
                                      data.train.label_vocabulary);
  const double ens =
      evaluate(gold_tags(data.dev), voted, data.train.label_vocabulary).micro_f1;
  const double med = median(single);
  o.require(ens >= med - 0.005, "ensemble " + fmt("%.4f", ens) + " < median " +
                                    fmt("%.4f", med) + " - 0.005");

  const std::vector<std::uint64_t> all{1, 2, 3, 4, 5};
  std::vector<double> no_fgm;
  for (const auto &r : run_seeds(data.train, data.dev,
                                 {end_to_end_model(), end_to_end_optimizer(),
                                  FgmConfig{false, 1.0}},
                                 all)) {
    no_fgm.push_back(dev_f1(r, data));
  }
  const double fgm_med = med, plain_med = median(no_fgm);
  o.require(fgm_med >= plain_med - 0.02, "FGM median " + fmt("%.4f", fgm_med) +
                                             " < no-FGM median " +
                                             fmt("%.4f", plain_med) + " - 0.02");
  if (o.pass) {
    o.detail = "ensemble " + fmt("%.4f", ens) + " vs median " + fmt("%.4f", med) +
               "; FGM median " + fmt("%.4f", fgm_med) + " vs no-FGM " +
               fmt("%.4f", plain_med);
  }
  return o;
}

// 7. Ensemble properties on randomized fixtures.
Outcome ensemble_properties() {
  Outcome o;
  const LabelVocabulary v;
  Rng rng(77);
  auto random_tag = [&] {
    return rng.bernoulli(0.4) ? std::string("O") : v.tag(rng.between(1, v.size() - 1));
  };
  auto run = [&](const std::vector<Tags> &members) {
    std::vector<std::vector<Tags>> per_model;
    for (const auto &m : members) per_model.push_back({m});
    return ensemble_predict(PredictionSet::from_models(per_model), v)[0];
  };
  const int fixtures = 1000;
  for (int f = 0; f < fixtures; ++f) {
    const std::size_t k = rng.between(1, 7), n = rng.between(1, 16);
    Tags base(n);
    for (auto &t : base) t = random_tag();
    std::vector<Tags> members(k, base);
    for (auto &m : members) {
      for (auto &t : m) {
        if (rng.bernoulli(0.3)) t = random_tag();
      }
    }
    const Tags out = run(members);

    const std::vector<Tags> copies(k, members[0]);
    o.require(run(copies) == oracle_repaired(members[0]), "k-copies idempotence");

    std::vector<Tags> shuffled = members;
    rng.shuffle(std::span<Tags>(shuffled));
    o.require(run(shuffled) == out, "permutation invariance");

    for (const auto &s : oracle::spans(out)) {
      std::size_t support = 0;
      for (const auto &m : members) {
        const auto ms = oracle::spans(m);
        support += static_cast<std::size_t>(std::count(ms.begin(), ms.end(), s));
      }
      o.require(2 * support > k, "strict-majority recount");
    }
    o.require(validate_bio(out, v).empty(), "valid BIO output");
  }
  if (o.pass) o.detail = std::to_string(fixtures) + " randomized fixtures, k in 1..7";
  return o;
}

// 8. Eval oracle.
Outcome eval_oracle() {
  Outcome o;
  const LabelVocabulary v;
  const EvalReport r = evaluate(fixture::kGold, fixture::kPred, v);
  for (const auto &e : fixture::kExpected) {
    const TypeMetrics &m = r.at(e.etype);
    o.require(m.tp == e.tp && m.gold_count == e.gold && m.pred_count == e.pred,
              e.etype + " counts");
    o.require(m.precision == e.precision && m.recall == e.recall &&
                  m.f1 == fixture::f1(e.precision, e.recall),
              e.etype + " P/R/F1");
  }
  o.require(r.micro_precision == fixture::kMicroPrecision, "micro P");
  o.require(r.micro_recall == fixture::kMicroRecall, "micro R");
  o.require(r.micro_f1 == fixture::f1(fixture::kMicroPrecision, fixture::kMicroRecall),
            "micro F1");
  o.require(r.macro_f1 == fixture::macro_f1(), "macro F1");
  const EvalReport same = evaluate(fixture::kGold, fixture::kGold, v);
  o.require(same.micro_precision == 1.0 && same.micro_recall == 1.0 &&
                same.micro_f1 == 1.0 && same.macro_f1 == 1.0,
            "evaluate(x, x) all ones");
  for (const auto &[t, m] : same.per_type) {
    if (m.gold_count == 0) continue;  // unobserved: 0/0 convention
    o.require(m.precision == 1.0 && m.recall == 1.0 && m.f1 == 1.0, t + " self F1");
  }
  if (o.pass) {
    o.detail = "10 sentences, 6 types, micro F1 " + fmt("%.6f", r.micro_f1) +
               ", macro F1 " + fmt("%.6f", r.macro_f1);
  }
  return o;
}

// 9. Round trips.
Outcome round_trips(const SyntheticSplit &data, const TrainRunResult &seed1) {
  Outcome o;
  const LabelVocabulary v;
  Rng rng(99);
  const int sequences = 20000;
  for (int i = 0; i < sequences; ++i) {
    Tags tags;
    const std::size_t n = rng.between(1, 25);
    while (tags.size() < n) {
      if (rng.bernoulli(0.4)) {
        tags.push_back("O");
        continue;
      }
      const std::string &t = v.entity_types()[rng.below(v.num_types())];
      const std::size_t len = std::min<std::size_t>(rng.between(1, 4), n - tags.size());
      tags.push_back("B-" + t);
      for (std::size_t j = 1; j < len; ++j) tags.push_back("I-" + t);
    }
    o.require(spans_to_tags(tags_to_spans(tags, v), n, v) == tags, "tags/spans");
  }

  const auto path = std::filesystem::temp_directory_path() / "seqlab_accept.ckpt";
  const Checkpoint ck{seed1.config, seed1.params, data.train.label_vocabulary,
                      data.train.token_vocabulary};
  save_checkpoint(path, ck);
  const Checkpoint back = load_checkpoint(path);
  const Checkpoint back2 = load_checkpoint(path);
  std::filesystem::remove(path);
  o.require(back.params == ck.params && back.config == ck.config &&
                back.token_vocabulary == ck.token_vocabulary &&
                back.label_vocabulary == ck.label_vocabulary,
            "checkpoint bit-exact");

  auto predict_bytes = [&](const Checkpoint &c) {
    Corpus input = data.dev;
    const auto tags = predict_tags(c.params, c.config, input, c.token_vocabulary);
    for (std::size_t s = 0; s < input.size(); ++s) input.sentences[s].tags = tags[s];
    std::ostringstream out;
    write_conll(out, input.sentences);
    return out.str();
  };
  const std::string first = predict_bytes(back);
  o.require(first == predict_bytes(back2), "predict determinism");
  o.require(first == predict_bytes(ck), "predict from reloaded checkpoint");
  if (o.pass) {
    o.detail = std::to_string(sequences) +
               " BIO round trips, bit-exact checkpoint, byte-identical predictions";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::string>> names = {
      {1, "CRF oracle equivalence"},   {2, "gradient check"},
      {3, "FGM unit contract"},        {4, "schedule/group contract"},
      {5, "synthetic end-to-end"},     {6, "relative claims"},
      {7, "ensemble properties"},      {8, "eval oracle"},
      {9, "round trips"},
  };
  const SyntheticSplit data = synthetic_split();
  TrainRunResult seed1;
  std::vector<Outcome> results;
  auto guarded = [](const std::function<Outcome()> &fn) {
    try {
      return fn();
    } catch (const std::exception &e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };
  results.push_back(guarded(crf_oracle));
  results.push_back(guarded(gradient_check));
  results.push_back(guarded(fgm_contract));
  results.push_back(guarded(schedule_contract));
  results.push_back(guarded([&] { return end_to_end(data, seed1); }));
  results.push_back(guarded([&] { return relative_claims(data, seed1); }));
  results.push_back(guarded(ensemble_properties));
  results.push_back(guarded(eval_oracle));
  results.push_back(guarded([&] { return round_trips(data, seed1); }));

  int failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::printf("criterion %d [%s]: %s - %s\n", names[i].first, names[i].second.c_str(),
                results[i].pass ? "PASS" : "FAIL", results[i].detail.c_str());
    failed += results[i].pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
