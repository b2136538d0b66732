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

#include "seqlab/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "seqlab/error.hpp"

namespace seqlab {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0
                  : static_cast<double>(num) / static_cast<double>(den);
}

struct Counts {
  std::vector<std::size_t> tp, gold, pred;
  explicit Counts(std::size_t n) : tp(n, 0), gold(n, 0), pred(n, 0) {}
};

void count_sentence(std::span<const Label> gold, std::span<const Label> pred,
                    const LabelVocabulary &vocab, Counts &c) {
  const auto gs = tags_to_spans(gold, vocab);
  const auto ps = tags_to_spans(pred, vocab);
  for (const auto &s : gs) ++c.gold[*vocab.find_type(s.etype)];
  for (const auto &s : ps) {
    const std::size_t type = *vocab.find_type(s.etype);
    ++c.pred[type];
    if (std::binary_search(gs.begin(), gs.end(), s)) ++c.tp[type];
  }
}

}  // namespace

const TypeMetrics &EvalReport::at(const std::string &etype) const {
  for (const auto &[name, m] : per_type) {
    if (name == etype) return m;
  }
  throw VocabularyError(0, "no metrics for type '" + etype + "'");
}

TypeMetrics make_metrics(std::size_t tp, std::size_t gold, std::size_t pred) {
  TypeMetrics m;
  m.tp = tp;
  m.gold_count = gold;
  m.pred_count = pred;
  m.precision = ratio(tp, pred);
  m.recall = ratio(tp, gold);
  const double denom = m.precision + m.recall;
  m.f1 = denom == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / denom;
  return m;
}

EvalReport evaluate(std::span<const std::vector<Label>> gold,
                    std::span<const std::vector<Label>> pred,
                    const LabelVocabulary &vocab) {
  if (gold.size() != pred.size()) {
    throw AlignmentError(std::min(gold.size(), pred.size()),
                         "gold has " + std::to_string(gold.size()) +
                             " sentences, prediction has " +
                             std::to_string(pred.size()));
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw AlignmentError(i, "gold length " + std::to_string(gold[i].size()) +
                                  " != predicted length " +
                                  std::to_string(pred[i].size()));
    }
  }

  const std::size_t n_types = vocab.num_types();
  const std::size_t n = gold.size();
  std::vector<Counts> partial(n, Counts(0));
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    partial[i] = Counts(n_types);
    count_sentence(gold[i], pred[i], vocab, partial[i]);
  }
  Counts total(n_types);
  for (const auto &c : partial) {
    for (std::size_t t = 0; t < n_types; ++t) {
      total.tp[t] += c.tp[t];
      total.gold[t] += c.gold[t];
      total.pred[t] += c.pred[t];
    }
  }

  EvalReport report;
  std::size_t tp = 0, g = 0, p = 0;
  double f1_sum = 0.0;
  std::size_t observed = 0;
  for (std::size_t t = 0; t < n_types; ++t) {
    const TypeMetrics m = make_metrics(total.tp[t], total.gold[t], total.pred[t]);
    report.per_type.emplace_back(vocab.entity_types()[t], m);
    tp += m.tp;
    g += m.gold_count;
    p += m.pred_count;
    if (m.gold_count + m.pred_count > 0) {
      f1_sum += m.f1;
      ++observed;
    }
  }
  const TypeMetrics micro = make_metrics(tp, g, p);
  report.micro_precision = micro.precision;
  report.micro_recall = micro.recall;
  report.micro_f1 = micro.f1;
  report.macro_f1 = observed == 0 ? 0.0 : f1_sum / static_cast<double>(observed);
  return report;
}

EvalReport evaluate(std::span<const std::vector<std::string>> gold,
                    std::span<const std::vector<std::string>> pred,
                    const LabelVocabulary &vocab) {
  std::vector<std::vector<Label>> g, p;
  g.reserve(gold.size());
  p.reserve(pred.size());
  for (const auto &s : gold) g.push_back(to_labels(s, vocab));
  for (const auto &s : pred) p.push_back(to_labels(s, vocab));
  return evaluate(std::span<const std::vector<Label>>(g),
                  std::span<const std::vector<Label>>(p), vocab);
}

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
  return buf;
}

std::string row(const std::string &name, const std::string &p,
                const std::string &r, const std::string &f1,
                const std::string &gold, const std::string &pred,
                const std::string &tp, std::size_t name_width) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s %8s %8s %8s %6s %6s %6s\n",
                static_cast<int>(name_width), name.c_str(), p.c_str(),
                r.c_str(), f1.c_str(), gold.c_str(), pred.c_str(), tp.c_str());
  return buf;
}

}  // namespace

std::string format_report(const EvalReport &report) {
  std::size_t width = 5;
  for (const auto &[name, m] : report.per_type) width = std::max(width, name.size());
  std::string out = row("Type", "P", "R", "F1", "Gold", "Pred", "TP", width);
  std::size_t g = 0, p = 0, tp = 0;
  for (const auto &[name, m] : report.per_type) {
    out += row(name, percent(m.precision), percent(m.recall), percent(m.f1),
               std::to_string(m.gold_count), std::to_string(m.pred_count),
               std::to_string(m.tp), width);
    g += m.gold_count;
    p += m.pred_count;
    tp += m.tp;
  }
  out += row("micro", percent(report.micro_precision),
             percent(report.micro_recall), percent(report.micro_f1),
             std::to_string(g), std::to_string(p), std::to_string(tp), width);
  out += row("macro", "-", "-", percent(report.macro_f1), "-", "-", "-", width);
  return out;
}

std::string format_report_tsv(const EvalReport &report) {
  std::string out = "type\tprecision\trecall\tf1\tgold\tpred\ttp\n";
  char buf[256];
  std::size_t g = 0, p = 0, tp = 0;
  for (const auto &[name, m] : report.per_type) {
    std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%.6f\t%.6f\t%zu\t%zu\t%zu\n",
                  name.c_str(), m.precision, m.recall, m.f1, m.gold_count,
                  m.pred_count, m.tp);
    out += buf;
    g += m.gold_count;
    p += m.pred_count;
    tp += m.tp;
  }
  std::snprintf(buf, sizeof(buf), "micro\t%.6f\t%.6f\t%.6f\t%zu\t%zu\t%zu\n",
                report.micro_precision, report.micro_recall, report.micro_f1, g,
                p, tp);
  out += buf;
  std::snprintf(buf, sizeof(buf), "macro\t-\t-\t%.6f\t-\t-\t-\n",
                report.macro_f1);
  out += buf;
  return out;
}

void save_report_tsv(const std::filesystem::path &path,
                     const EvalReport &report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << format_report_tsv(report);
}

}  // namespace seqlab
