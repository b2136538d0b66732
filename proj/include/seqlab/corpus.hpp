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

// Labeled token sequences, BIO tag handling and CoNLL-style files.
//
// Tags follow the BIO scheme: "O" outside any entity, "B-<type>" opening an
// entity and "I-<type>" continuing it. Label index 0 is always "O"; entity
// type i owns indices 2i+1 (B) and 2i+2 (I).

#ifndef SEQLAB_CORPUS_HPP_
#define SEQLAB_CORPUS_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace seqlab {

using Label = std::size_t;
using TokenId = std::size_t;

class LabelVocabulary {
 public:
  // CONST_DIR, LIMIT, OBJ_DIR, OBJ_NAME, PARAM, VAR.
  static std::vector<std::string> default_entity_types();

  LabelVocabulary() : LabelVocabulary(default_entity_types()) {}
  explicit LabelVocabulary(std::vector<std::string> entity_types);

  const std::vector<std::string> &entity_types() const { return types_; }
  const std::vector<std::string> &tags() const { return tags_; }
  std::size_t size() const { return tags_.size(); }
  std::size_t num_types() const { return types_.size(); }

  std::optional<Label> find(const std::string &tag) const;
  // Throws VocabularyError for unknown tags.
  Label index(const std::string &tag) const;
  const std::string &tag(Label label) const { return tags_.at(label); }

  std::optional<std::size_t> find_type(const std::string &etype) const;
  Label begin_label(std::size_t type) const { return 2 * type + 1; }
  Label inside_label(std::size_t type) const { return 2 * type + 2; }
  static bool is_outside(Label l) { return l == 0; }
  static bool is_begin(Label l) { return l % 2 == 1; }
  static bool is_inside(Label l) { return l != 0 && l % 2 == 0; }
  // Entity type index of a B or I label. Undefined for "O".
  static std::size_t type_of(Label l) { return (l - 1) / 2; }

  friend bool operator==(const LabelVocabulary &a, const LabelVocabulary &b) {
    return a.types_ == b.types_;
  }

 private:
  std::vector<std::string> types_;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, Label> tag_index_;
};

// Corpus-derived token lexicon. Index 0 is reserved for unknown tokens.
class TokenVocabulary {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr const char *kUnkToken = "<unk>";

  TokenVocabulary();

  // Returns the id of `token`, adding it if absent.
  TokenId add(const std::string &token);
  // Id of `token`, or kUnk.
  TokenId lookup(const std::string &token) const;
  const std::string &token(TokenId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  friend bool operator==(const TokenVocabulary &a, const TokenVocabulary &b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;  // empty for unlabeled input
  std::vector<TokenId> token_ids;

  bool labeled() const { return !tags.empty(); }
  std::size_t size() const { return tokens.size(); }

  friend bool operator==(const Sentence &, const Sentence &) = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  TokenVocabulary token_vocabulary;
  LabelVocabulary label_vocabulary;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
};

// Half-open token range [start, end) carrying one entity type.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string etype;

  std::size_t length() const { return end - start; }
  bool overlaps(const EntitySpan &o) const {
    return start < o.end && o.start < end;
  }

  friend auto operator<=>(const EntitySpan &, const EntitySpan &) = default;
  friend bool operator==(const EntitySpan &, const EntitySpan &) = default;
};

std::string to_string(const EntitySpan &span);

enum class BioViolationKind {
  kInsideAtStart,     // I-t at position 0
  kInsideAfterOutside,  // I-t following O
  kTypeMismatch,      // I-t following B-s or I-s with s != t
};

struct BioViolation {
  std::size_t position = 0;
  BioViolationKind kind = BioViolationKind::kInsideAtStart;

  friend bool operator==(const BioViolation &, const BioViolation &) = default;
};

const char *to_string(BioViolationKind kind);

std::vector<Label> to_labels(std::span<const std::string> tags,
                             const LabelVocabulary &vocab);
std::vector<std::string> to_tags(std::span<const Label> labels,
                                 const LabelVocabulary &vocab);

std::vector<BioViolation> validate_bio(std::span<const Label> labels);
std::vector<BioViolation> validate_bio(std::span<const std::string> tags,
                                       const LabelVocabulary &vocab);

// Any I-t that starts a new entity is read as B-t; a span then runs from its
// B through the maximal run of matching I tags. Output is sorted by start.
std::vector<EntitySpan> tags_to_spans(std::span<const Label> labels,
                                      const LabelVocabulary &vocab);
std::vector<EntitySpan> tags_to_spans(std::span<const std::string> tags,
                                      const LabelVocabulary &vocab);

// Inverse of tags_to_spans. Throws OverlapError, RangeError or
// VocabularyError.
std::vector<Label> spans_to_labels(std::span<const EntitySpan> spans,
                                   std::size_t length,
                                   const LabelVocabulary &vocab);
std::vector<std::string> spans_to_tags(std::span<const EntitySpan> spans,
                                       std::size_t length,
                                       const LabelVocabulary &vocab);

// Applies the I->B repair rule; the result always validates.
std::vector<Label> repair_bio(std::span<const Label> labels);

// CoNLL reading. Each non-blank line is `token<TAB>tag` or `token`; blank
// lines separate sentences. The token vocabulary is built from the file in
// first-appearance order.
Corpus read_conll(std::istream &in, const LabelVocabulary &label_vocab);
Corpus load_conll(const std::filesystem::path &path,
                  const LabelVocabulary &label_vocab);

// As above, but token ids come from an existing vocabulary; unseen tokens map
// to TokenVocabulary::kUnk.
Corpus read_conll(std::istream &in, const LabelVocabulary &label_vocab,
                  const TokenVocabulary &token_vocab);
Corpus load_conll(const std::filesystem::path &path,
                  const LabelVocabulary &label_vocab,
                  const TokenVocabulary &token_vocab);

// Writes sentences in the format read_conll accepts. Each sentence is
// followed by one blank line.
void write_conll(std::ostream &out, std::span<const Sentence> sentences);
void save_conll(const std::filesystem::path &path,
                std::span<const Sentence> sentences);

// Re-derives token_ids against `token_vocab`.
Corpus reindex(const Corpus &corpus, const TokenVocabulary &token_vocab);

// Deterministic, learnable stand-in corpus over the default entity types.
// Word roles are a function of vocab_size only; the seed drives sampling.
Corpus make_synthetic_corpus(std::uint64_t seed, std::size_t n_sentences,
                             std::size_t vocab_size);

}  // namespace seqlab

#endif  // SEQLAB_CORPUS_HPP_
