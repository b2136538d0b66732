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

#include <map>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "seqlab/corpus.hpp"
#include "seqlab/error.hpp"
#include "seqlab/random.hpp"

using namespace seqlab;

namespace {

using Tags = std::vector<std::string>;

std::vector<std::string> random_valid_bio(Rng &rng, const LabelVocabulary &v,
                                          std::size_t n) {
  std::vector<std::string> tags;
  while (tags.size() < n) {
    if (rng.bernoulli(0.4)) {
      tags.push_back("O");
      continue;
    }
    const std::string &t = v.entity_types()[rng.below(v.num_types())];
    const std::size_t len = std::min<std::size_t>(rng.between(1, 4), n - tags.size());
    tags.push_back("B-" + t);
    for (std::size_t i = 1; i < len; ++i) tags.push_back("I-" + t);
  }
  return tags;
}

}  // namespace

TEST_CASE("label vocabulary layout") {
  const LabelVocabulary v;
  REQUIRE(v.size() == 13);
  CHECK(v.tag(0) == "O");
  CHECK(v.entity_types() ==
        Tags{"CONST_DIR", "LIMIT", "OBJ_DIR", "OBJ_NAME", "PARAM", "VAR"});
  for (Label l = 0; l < v.size(); ++l) CHECK(v.index(v.tag(l)) == l);
  CHECK(v.tag(v.begin_label(5)) == "B-VAR");
  CHECK(v.tag(v.inside_label(1)) == "I-LIMIT");
  CHECK_FALSE(v.find("B-FOO").has_value());
  CHECK_THROWS_AS(v.index("B-FOO"), VocabularyError);
  CHECK_THROWS_AS(LabelVocabulary(Tags{"A", "A"}), VocabularyError);
}

TEST_CASE("validate_bio examples") {
  const LabelVocabulary v;
  CHECK(validate_bio(Tags{"B-VAR", "I-VAR", "O"}, v).empty());
  const auto a = validate_bio(Tags{"I-VAR"}, v);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == BioViolation{0, BioViolationKind::kInsideAtStart});
  const auto b = validate_bio(Tags{"B-VAR", "I-LIMIT"}, v);
  REQUIRE(b.size() == 1);
  CHECK(b[0] == BioViolation{1, BioViolationKind::kTypeMismatch});
  const auto c = validate_bio(Tags{"O", "I-VAR", "I-VAR"}, v);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == BioViolation{1, BioViolationKind::kInsideAfterOutside});
}

TEST_CASE("tags_to_spans examples") {
  const LabelVocabulary v;
  CHECK(tags_to_spans(Tags{"B-VAR", "I-VAR", "O", "B-LIMIT"}, v) ==
        std::vector<EntitySpan>{{0, 2, "VAR"}, {3, 4, "LIMIT"}});
  CHECK(tags_to_spans(Tags{"O", "O"}, v).empty());
  CHECK(tags_to_spans(Tags{"I-VAR", "I-VAR"}, v) ==
        std::vector<EntitySpan>{{0, 2, "VAR"}});
  CHECK(tags_to_spans(Tags{"B-VAR", "I-LIMIT", "I-LIMIT", "B-VAR", "B-VAR"}, v) ==
        std::vector<EntitySpan>{{0, 1, "VAR"}, {1, 3, "LIMIT"}, {3, 4, "VAR"},
                                {4, 5, "VAR"}});
}

TEST_CASE("spans_to_tags examples and errors") {
  const LabelVocabulary v;
  const std::vector<EntitySpan> one{{0, 2, "VAR"}};
  CHECK(spans_to_tags(one, 3, v) == Tags{"B-VAR", "I-VAR", "O"});
  CHECK(spans_to_tags(std::vector<EntitySpan>{}, 2, v) == Tags{"O", "O"});
  const std::vector<EntitySpan> overlap{{0, 1, "VAR"}, {0, 2, "VAR"}};
  CHECK_THROWS_AS(spans_to_tags(overlap, 3, v), OverlapError);
  const std::vector<EntitySpan> outside{{2, 4, "VAR"}};
  CHECK_THROWS_AS(spans_to_tags(outside, 3, v), RangeError);
  const std::vector<EntitySpan> unknown{{0, 1, "FOO"}};
  CHECK_THROWS_AS(spans_to_tags(unknown, 3, v), VocabularyError);
}

TEST_CASE("random BIO sequences: oracle spans, round trip, repair") {
  const LabelVocabulary v;
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const Tags valid = random_valid_bio(rng, v, rng.between(1, 20));
    const auto spans = tags_to_spans(valid, v);
    CHECK(validate_bio(valid, v).empty());
    CHECK(spans_to_tags(spans, valid.size(), v) == valid);

    Tags noisy(valid.size());
    for (auto &t : noisy) t = v.tag(rng.below(v.size()));
    const auto got = tags_to_spans(noisy, v);
    const auto want = oracle::spans(noisy);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].start == want[i].start);
      CHECK(got[i].end == want[i].end);
      CHECK(got[i].etype == want[i].etype);
    }
    const auto labels = to_labels(noisy, v);
    const auto repaired = repair_bio(labels);
    CHECK(validate_bio(repaired).empty());
    CHECK(tags_to_spans(repaired, v) == got);
    CHECK(repair_bio(repaired) == repaired);
    CHECK(validate_bio(spans_to_tags(got, noisy.size(), v), v).empty());
  }
}

TEST_CASE("read_conll") {
  const LabelVocabulary v;
  SUBCASE("single sentence") {
    std::istringstream in("fish\tB-VAR\n");
    const Corpus c = read_conll(in, v);
    REQUIRE(c.size() == 1);
    CHECK(c.sentences[0].tokens == Tags{"fish"});
    CHECK(c.sentences[0].tags == Tags{"B-VAR"});
    CHECK(c.token_vocabulary.token(0) == "<unk>");
    CHECK(c.sentences[0].token_ids == std::vector<TokenId>{1});
  }
  SUBCASE("two blocks, CRLF, extra blank lines") {
    std::istringstream in("a\tO\r\nb\tB-VAR\r\n\r\n\n\nc\tO\n\n");
    const Corpus c = read_conll(in, v);
    REQUIRE(c.size() == 2);
    CHECK(c.sentences[0].tokens == Tags{"a", "b"});
    CHECK(c.sentences[1].tags == Tags{"O"});
  }
  SUBCASE("untagged input") {
    std::istringstream in("a\nb\n");
    const Corpus c = read_conll(in, v);
    CHECK_FALSE(c.sentences[0].labeled());
  }
  SUBCASE("three columns") {
    std::istringstream in("fish B-VAR extra\n");
    try {
      read_conll(in, v);
      FAIL("expected ParseError");
    } catch (const ParseError &e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("unknown tag") {
    std::istringstream in("a\tO\nb\tB-FOO\n");
    try {
      read_conll(in, v);
      FAIL("expected VocabularyError");
    } catch (const VocabularyError &e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("mixed tagged and untagged") {
    std::istringstream in("a\tO\nb\n");
    CHECK_THROWS_AS(read_conll(in, v), ParseError);
  }
  SUBCASE("empty") {
    std::istringstream in("\n\n");
    CHECK_THROWS_AS(read_conll(in, v), EmptyCorpusError);
  }
  SUBCASE("fixed vocabulary maps unknown tokens to UNK") {
    std::istringstream a("x\tO\ny\tO\n");
    const Corpus train = read_conll(a, v);
    std::istringstream b("y\tO\nz\tO\n");
    const Corpus test = read_conll(b, v, train.token_vocabulary);
    CHECK(test.sentences[0].token_ids == std::vector<TokenId>{2, 0});
    CHECK(test.token_vocabulary == train.token_vocabulary);
  }
}

TEST_CASE("write_conll reproduces the input") {
  const std::string text = "a\tO\nb\tB-VAR\nc\tI-VAR\n\nd\tB-PARAM\n\n";
  std::istringstream in(text);
  const Corpus c = read_conll(in, LabelVocabulary());
  std::ostringstream out;
  write_conll(out, c.sentences);
  CHECK(out.str() == text);
}

TEST_CASE("synthetic corpus") {
  const Corpus a = make_synthetic_corpus(1, 10, 50);
  const Corpus b = make_synthetic_corpus(1, 10, 50);
  const Corpus c = make_synthetic_corpus(2, 10, 50);
  CHECK(a.sentences == b.sentences);
  CHECK(a.sentences != c.sentences);

  const Corpus big = make_synthetic_corpus(1, 500, 200);
  std::map<std::string, int> counts;
  for (const auto &s : big.sentences) {
    CHECK(s.size() >= 5);
    CHECK(s.size() <= 30);
    CHECK(validate_bio(s.tags, big.label_vocabulary).empty());
    for (const auto &sp : oracle::spans(s.tags)) ++counts[sp.etype];
  }
  REQUIRE(counts.size() == 6);
  for (const auto &[t, n] : counts) {
    INFO(t);
    CHECK(n >= 20);
  }
  CHECK(big.token_vocabulary.size() <= 201);
  CHECK_THROWS_AS(make_synthetic_corpus(1, 0, 200), RangeError);
  CHECK_THROWS_AS(make_synthetic_corpus(1, 5, 19), RangeError);
}
