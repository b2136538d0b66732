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

#include "seqlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "seqlab/error.hpp"
#include "seqlab/random.hpp"

namespace seqlab {

std::vector<std::string> LabelVocabulary::default_entity_types() {
  return {"CONST_DIR", "LIMIT", "OBJ_DIR", "OBJ_NAME", "PARAM", "VAR"};
}

LabelVocabulary::LabelVocabulary(std::vector<std::string> entity_types)
    : types_(std::move(entity_types)) {
  tags_.push_back("O");
  for (const auto &t : types_) {
    if (t.empty() || t == "O") {
      throw VocabularyError(0, "invalid entity type name '" + t + "'");
    }
    tags_.push_back("B-" + t);
    tags_.push_back("I-" + t);
  }
  for (Label i = 0; i < tags_.size(); ++i) {
    if (!tag_index_.emplace(tags_[i], i).second) {
      throw VocabularyError(0, "duplicate tag '" + tags_[i] + "'");
    }
  }
}

std::optional<Label> LabelVocabulary::find(const std::string &tag) const {
  auto it = tag_index_.find(tag);
  if (it == tag_index_.end()) return std::nullopt;
  return it->second;
}

Label LabelVocabulary::index(const std::string &tag) const {
  auto l = find(tag);
  if (!l) throw VocabularyError(0, "unknown tag '" + tag + "'");
  return *l;
}

std::optional<std::size_t> LabelVocabulary::find_type(
    const std::string &etype) const {
  auto it = std::find(types_.begin(), types_.end(), etype);
  if (it == types_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - types_.begin());
}

TokenVocabulary::TokenVocabulary() { add(kUnkToken); }

TokenId TokenVocabulary::add(const std::string &token) {
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

TokenId TokenVocabulary::lookup(const std::string &token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::string to_string(const EntitySpan &span) {
  return "(" + std::to_string(span.start) + "," + std::to_string(span.end) +
         "," + span.etype + ")";
}

const char *to_string(BioViolationKind kind) {
  switch (kind) {
    case BioViolationKind::kInsideAtStart:
      return "I-at-start";
    case BioViolationKind::kInsideAfterOutside:
      return "I-after-O";
    case BioViolationKind::kTypeMismatch:
      return "type-mismatch";
  }
  return "unknown";
}

std::vector<Label> to_labels(std::span<const std::string> tags,
                             const LabelVocabulary &vocab) {
  std::vector<Label> out;
  out.reserve(tags.size());
  for (const auto &t : tags) out.push_back(vocab.index(t));
  return out;
}

std::vector<std::string> to_tags(std::span<const Label> labels,
                                 const LabelVocabulary &vocab) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (Label l : labels) out.push_back(vocab.tag(l));
  return out;
}

std::vector<BioViolation> validate_bio(std::span<const Label> labels) {
  std::vector<BioViolation> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Label l = labels[i];
    if (!LabelVocabulary::is_inside(l)) continue;
    if (i == 0) {
      out.push_back({i, BioViolationKind::kInsideAtStart});
    } else if (LabelVocabulary::is_outside(labels[i - 1])) {
      out.push_back({i, BioViolationKind::kInsideAfterOutside});
    } else if (LabelVocabulary::type_of(labels[i - 1]) !=
               LabelVocabulary::type_of(l)) {
      out.push_back({i, BioViolationKind::kTypeMismatch});
    }
  }
  return out;
}

std::vector<BioViolation> validate_bio(std::span<const std::string> tags,
                                       const LabelVocabulary &vocab) {
  return validate_bio(to_labels(tags, vocab));
}

std::vector<Label> repair_bio(std::span<const Label> labels) {
  std::vector<Label> out(labels.begin(), labels.end());
  for (const auto &v : validate_bio(labels)) {
    out[v.position] = out[v.position] - 1;  // I-t -> B-t
  }
  return out;
}

std::vector<EntitySpan> tags_to_spans(std::span<const Label> labels,
                                      const LabelVocabulary &vocab) {
  std::vector<EntitySpan> spans;
  const std::vector<Label> fixed = repair_bio(labels);
  std::size_t i = 0;
  while (i < fixed.size()) {
    if (!LabelVocabulary::is_begin(fixed[i])) {
      ++i;
      continue;
    }
    const std::size_t type = LabelVocabulary::type_of(fixed[i]);
    std::size_t j = i + 1;
    while (j < fixed.size() && fixed[j] == vocab.inside_label(type)) ++j;
    spans.push_back({i, j, vocab.entity_types().at(type)});
    i = j;
  }
  return spans;
}

std::vector<EntitySpan> tags_to_spans(std::span<const std::string> tags,
                                      const LabelVocabulary &vocab) {
  return tags_to_spans(to_labels(tags, vocab), vocab);
}

std::vector<Label> spans_to_labels(std::span<const EntitySpan> spans,
                                   std::size_t length,
                                   const LabelVocabulary &vocab) {
  std::vector<Label> labels(length, 0);
  std::vector<const EntitySpan *> owner(length, nullptr);
  for (const auto &s : spans) {
    if (s.start >= s.end || s.end > length) {
      throw RangeError("span " + to_string(s) + " outside [0, " +
                       std::to_string(length) + ")");
    }
    auto type = vocab.find_type(s.etype);
    if (!type) throw VocabularyError(0, "unknown entity type '" + s.etype + "'");
    for (std::size_t t = s.start; t < s.end; ++t) {
      if (owner[t] != nullptr) {
        throw OverlapError("spans " + to_string(*owner[t]) + " and " +
                           to_string(s) + " overlap");
      }
      owner[t] = &s;
      labels[t] = t == s.start ? vocab.begin_label(*type)
                               : vocab.inside_label(*type);
    }
  }
  return labels;
}

std::vector<std::string> spans_to_tags(std::span<const EntitySpan> spans,
                                       std::size_t length,
                                       const LabelVocabulary &vocab) {
  return to_tags(spans_to_labels(spans, length, vocab), vocab);
}

namespace {

std::vector<std::string> split_columns(const std::string &line) {
  std::vector<std::string> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    cols.push_back(line.substr(i, j - i));
    i = j;
  }
  return cols;
}

bool is_blank(const std::string &line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c));
  });
}

// Reads sentences; token ids are assigned by `assign`.
template <typename AssignId>
std::vector<Sentence> read_sentences(std::istream &in,
                                     const LabelVocabulary &label_vocab,
                                     AssignId assign) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::size_t current_first_line = 0;
  std::string line;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (current.tokens.empty()) return;
    if (current.labeled() && current.tags.size() != current.tokens.size()) {
      throw ParseError(current_first_line,
                       "sentence mixes tagged and untagged lines");
    }
    sentences.push_back(std::move(current));
    current = Sentence{};
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) {
      flush();
      continue;
    }
    auto cols = split_columns(line);
    if (cols.size() != 1 && cols.size() != 2) {
      throw ParseError(lineno, "expected 1 or 2 columns, found " +
                                   std::to_string(cols.size()));
    }
    if (current.tokens.empty()) current_first_line = lineno;
    const bool has_tag = cols.size() == 2;
    if (!current.tokens.empty() && has_tag != current.labeled()) {
      throw ParseError(lineno, "sentence mixes tagged and untagged lines");
    }
    if (has_tag) {
      if (!label_vocab.find(cols[1])) {
        throw VocabularyError(lineno, "unknown tag '" + cols[1] + "'");
      }
      current.tags.push_back(cols[1]);
    }
    current.token_ids.push_back(assign(cols[0]));
    current.tokens.push_back(std::move(cols[0]));
  }
  flush();
  if (sentences.empty()) throw EmptyCorpusError("input contains no sentences");
  return sentences;
}

std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Corpus read_conll(std::istream &in, const LabelVocabulary &label_vocab) {
  Corpus corpus;
  corpus.label_vocabulary = label_vocab;
  corpus.sentences = read_sentences(in, label_vocab, [&](const std::string &t) {
    return corpus.token_vocabulary.add(t);
  });
  return corpus;
}

Corpus load_conll(const std::filesystem::path &path,
                  const LabelVocabulary &label_vocab) {
  auto in = open_input(path);
  return read_conll(in, label_vocab);
}

Corpus read_conll(std::istream &in, const LabelVocabulary &label_vocab,
                  const TokenVocabulary &token_vocab) {
  Corpus corpus;
  corpus.label_vocabulary = label_vocab;
  corpus.token_vocabulary = token_vocab;
  corpus.sentences = read_sentences(in, label_vocab, [&](const std::string &t) {
    return token_vocab.lookup(t);
  });
  return corpus;
}

Corpus load_conll(const std::filesystem::path &path,
                  const LabelVocabulary &label_vocab,
                  const TokenVocabulary &token_vocab) {
  auto in = open_input(path);
  return read_conll(in, label_vocab, token_vocab);
}

void write_conll(std::ostream &out, std::span<const Sentence> sentences) {
  for (const auto &s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i];
      if (s.labeled()) out << '\t' << s.tags[i];
      out << '\n';
    }
    out << '\n';
  }
}

void save_conll(const std::filesystem::path &path,
                std::span<const Sentence> sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_conll(out, sentences);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

Corpus reindex(const Corpus &corpus, const TokenVocabulary &token_vocab) {
  Corpus out = corpus;
  out.token_vocabulary = token_vocab;
  for (auto &s : out.sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      s.token_ids[i] = token_vocab.lookup(s.tokens[i]);
    }
  }
  return out;
}

namespace {

// Word roles for the synthetic task. Every entity type has its own cue words
// (tagged O, always directly before an entity) and its own entity words.
// Ambiguous words appear both as filler and as the first token of an entity,
// so labeling them needs the left neighbour.
struct SyntheticLexicon {
  std::vector<std::vector<std::string>> cues;  // per type
  std::vector<std::vector<std::string>> pools;  // per type
  std::vector<std::string> ambiguous;
  std::vector<std::string> filler;

  explicit SyntheticLexicon(std::size_t vocab_size,
                            const std::vector<std::string> &types) {
    const std::size_t n_types = types.size();
    const std::size_t n_cue = std::max<std::size_t>(1, vocab_size / 50);
    const std::size_t n_amb = std::max<std::size_t>(1, vocab_size / 20);
    const std::size_t used = n_types * n_cue + n_amb;
    const std::size_t n_pool =
        std::max<std::size_t>(1, (vocab_size - used) / (3 * n_types));
    const std::size_t n_filler = vocab_size - used - n_types * n_pool;
    cues.resize(n_types);
    pools.resize(n_types);
    for (std::size_t t = 0; t < n_types; ++t) {
      std::string stem = types[t];
      std::transform(stem.begin(), stem.end(), stem.begin(), [](char c) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      });
      for (std::size_t i = 0; i < n_cue; ++i)
        cues[t].push_back("cue_" + stem + "_" + std::to_string(i));
      for (std::size_t i = 0; i < n_pool; ++i)
        pools[t].push_back(stem + "_" + std::to_string(i));
    }
    for (std::size_t i = 0; i < n_amb; ++i)
      ambiguous.push_back("amb_" + std::to_string(i));
    for (std::size_t i = 0; i < n_filler; ++i)
      filler.push_back("w_" + std::to_string(i));
  }
};

constexpr std::size_t kMinSentence = 5;
constexpr std::size_t kMaxSentence = 30;
constexpr double kEntityRate = 0.3;
constexpr double kAmbiguousEntityRate = 0.3;
constexpr double kAmbiguousFillerRate = 0.1;

std::size_t max_entity_length(const std::string &etype) {
  if (etype == "OBJ_DIR") return 1;
  if (etype == "CONST_DIR") return 2;
  return 3;
}

const std::string &pick(Rng &rng, const std::vector<std::string> &words) {
  return words[rng.below(words.size())];
}

}  // namespace

Corpus make_synthetic_corpus(std::uint64_t seed, std::size_t n_sentences,
                             std::size_t vocab_size) {
  if (n_sentences < 1) throw RangeError("n_sentences must be >= 1");
  if (vocab_size < 20) throw RangeError("vocab_size must be >= 20");

  Corpus corpus;
  const auto &types = corpus.label_vocabulary.entity_types();
  const SyntheticLexicon lex(vocab_size, types);
  Rng rng(seed);

  // Types not yet generated; forced into the first sentences so that every
  // type occurs even in tiny corpora.
  std::size_t next_forced = 0;

  for (std::size_t n = 0; n < n_sentences; ++n) {
    Sentence s;
    std::size_t target = rng.between(kMinSentence, kMaxSentence);
    const std::size_t forced_left = types.size() - next_forced;
    target = std::min(kMaxSentence, std::max(target, 2 * forced_left));
    while (s.tokens.size() < target) {
      const std::size_t room = target - s.tokens.size();
      const bool forcing = next_forced < types.size();
      if (room >= 2 && (forcing || rng.bernoulli(kEntityRate))) {
        const std::size_t type = forcing ? next_forced++ : rng.below(types.size());
        const std::size_t len =
            std::min(rng.between(1, max_entity_length(types[type])), room - 1);
        s.tokens.push_back(pick(rng, lex.cues[type]));
        s.tags.push_back("O");
        for (std::size_t i = 0; i < len; ++i) {
          const bool amb = i == 0 && rng.bernoulli(kAmbiguousEntityRate);
          s.tokens.push_back(amb ? pick(rng, lex.ambiguous)
                                 : pick(rng, lex.pools[type]));
          s.tags.push_back((i == 0 ? "B-" : "I-") + types[type]);
        }
      } else {
        const bool amb = rng.bernoulli(kAmbiguousFillerRate);
        s.tokens.push_back(amb ? pick(rng, lex.ambiguous)
                               : pick(rng, lex.filler));
        s.tags.push_back("O");
      }
    }
    for (const auto &tok : s.tokens) {
      s.token_ids.push_back(corpus.token_vocabulary.add(tok));
    }
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace seqlab
