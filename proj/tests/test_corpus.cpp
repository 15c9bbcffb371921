#include <doctest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "neraug/corpus.hpp"
#include "neraug/error.hpp"

using namespace neraug;
using neraug::testing::conll_schema;

TEST_CASE("parse_conll decodes BIO runs into spans") {
  const auto d = parse_conll("EU B-ORG\nrejects O\nGerman B-MISC\ncall O\n", conll_schema());
  REQUIRE(d.sentences.size() == 1);
  const auto& s = d.sentences[0];
  CHECK(s.tokens == std::vector<std::string>{"EU", "rejects", "German", "call"});
  REQUIRE(s.spans.size() == 2);
  CHECK(s.spans[0] == EntitySpan{0, 1, TypeId{1}});
  CHECK(s.spans[1] == EntitySpan{2, 3, TypeId{3}});
}

TEST_CASE("parse_conll handles empty input and multi-column lines") {
  CHECK(parse_conll("", conll_schema()).sentences.empty());
  CHECK(parse_conll("\n\n", conll_schema()).sentences.empty());
  const auto d = parse_conll("-DOCSTART- -X- O O\n\nPeter NNP B-NP B-PER\nBlackburn NNP I-NP I-PER\n\nok . O O\n",
                             conll_schema());
  REQUIRE(d.sentences.size() == 2);
  CHECK(d.sentences[0].spans == std::vector<EntitySpan>{{0, 2, TypeId{0}}});
  CHECK(d.sentences[1].spans.empty());
  CHECK(d.sentences[0].id == "s0");
  CHECK(d.sentences[1].id == "s1");
}

TEST_CASE("lenient mode repairs dangling I- tags, strict mode rejects them") {
  const std::string text = "Obama I-PER\nspoke O\nin O\nI-LOC I-LOC\nParis I-LOC\n";
  const auto d = parse_conll(text, conll_schema(), ParseMode::Lenient);
  REQUIRE(d.sentences.size() == 1);
  CHECK(d.sentences[0].spans == std::vector<EntitySpan>{{0, 1, TypeId{0}}, {3, 5, TypeId{2}}});

  try {
    parse_conll(text, conll_schema(), ParseMode::Strict);
    FAIL("expected InvalidBioTransition");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidBioTransition);
  }
  // I- of a different type also breaks the run.
  const auto mixed = parse_conll("a B-PER\nb I-ORG\n", conll_schema(), ParseMode::Lenient);
  CHECK(mixed.sentences[0].spans == std::vector<EntitySpan>{{0, 1, TypeId{0}}, {1, 2, TypeId{1}}});
}

TEST_CASE("parse_conll errors") {
  auto code_of = [](const std::string& text) {
    try {
      parse_conll(text, conll_schema());
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code_of("x B-FOO\n") == ErrorCode::UnknownTag);
  CHECK(code_of("x E-PER\n") == ErrorCode::UnknownTag);
  CHECK(code_of("lonely\n") == ErrorCode::MalformedLine);
}

TEST_CASE("emit_conll writes BIO2 and round-trips") {
  Dataset d{conll_schema(), {{"a", {"New", "York", "rocks"}, {{0, 2, TypeId{2}}}}}, true};
  const auto text = emit_conll(d);
  CHECK(text == "# id = a\nNew B-LOC\nYork I-LOC\nrocks O\n");
  CHECK(parse_conll(text, d.schema) == d);
  CHECK(emit_conll(Dataset{conll_schema(), {}, true}).empty());
}

TEST_CASE("parse and emit are mutual inverses on random corpora") {
  Rng rng(7);
  const auto schema = conll_schema();
  for (int round = 0; round < 50; ++round) {
    Dataset d{schema, {}, true};
    const auto n = uniform_index(rng, 0, 6);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = neraug::testing::random_sentence(rng, schema.size(), "id" + std::to_string(i));
      if (s.tokens.empty()) s.tokens.push_back("w");
      d.sentences.push_back(std::move(s));
    }
    const auto text = emit_conll(d);
    const auto back = parse_conll(text, schema);
    REQUIRE(back == d);
    CHECK(emit_conll(back) == text);
  }
}

TEST_CASE("schema file parsing") {
  std::istringstream in("PER\tPerson\t1,0\nLOC\t location \t0,2\n# comment\n");
  const auto schema = LabelSchema::parse(in);
  REQUIRE(schema.size() == 2);
  CHECK(schema.display_name(TypeId{0}) == "person");
  CHECK(schema.display_name(TypeId{1}) == "location");
  CHECK(schema.find_display_name("  LOCATION ") == TypeId{1});
  REQUIRE(schema.has_embeddings());
  CHECK(schema.embeddings()(1, 1) == 2.0);

  std::ostringstream out;
  schema.write(out);
  std::istringstream again(out.str());
  CHECK(LabelSchema::parse(again) == schema);

  std::istringstream dup("PER\tperson\nP2\tPerson\n");
  CHECK_THROWS_AS(LabelSchema::parse(dup), Error);
  std::istringstream ragged("PER\tperson\t1,2\nLOC\tlocation\t1\n");
  CHECK_THROWS_AS(LabelSchema::parse(ragged), Error);
  std::istringstream partial("PER\tperson\t1,2\nLOC\tlocation\n");
  CHECK_THROWS_AS(LabelSchema::parse(partial), Error);
}

namespace {

Dataset shot_corpus() {
  // 40 sentences; sentence i carries type (i % 4) and, every fifth, also PER.
  Dataset d{conll_schema(), {}, true};
  for (std::size_t i = 0; i < 40; ++i) {
    TaggedSentence s{"s" + std::to_string(i), {"w", "x", "y"}, {{0, 1, TypeId{i % 4}}}};
    if (i % 5 == 0 && i % 4 != 0) s.spans.push_back({2, 3, TypeId{0}});
    d.sentences.push_back(s);
  }
  d.sentences.push_back({"plain", {"no", "entities"}, {}});
  return d;
}

bool contains_type(const TaggedSentence& s, std::size_t t) {
  for (const auto& sp : s.spans)
    if (sp.type.value == t) return true;
  return false;
}

}  // namespace

TEST_CASE("sample_shots respects the per-type quota") {
  const auto d = shot_corpus();
  const auto split = sample_shots(d, 5, 42);
  CHECK(split.train.sentences.size() <= 20);
  CHECK(split.warnings.empty());
  CHECK(split.train.labeled);
  CHECK_FALSE(split.unlabeled.labeled);
  for (std::size_t t = 0; t < 4; ++t) {
    std::size_t covered = 0;
    for (const auto& s : split.train.sentences) covered += contains_type(s, t) ? 1 : 0;
    CHECK(covered >= 5);
  }
  // Disjoint and exhaustive.
  std::multiset<std::string> ids;
  for (const auto& s : split.train.sentences) ids.insert(s.id);
  for (const auto& s : split.unlabeled.sentences) ids.insert(s.id);
  CHECK(ids.size() == d.sentences.size());
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == d.sentences.size());
  // Unlabeled keeps spans for oracle scoring.
  bool any_spans = false;
  for (const auto& s : split.unlabeled.sentences) any_spans |= !s.spans.empty();
  CHECK(any_spans);
}

TEST_CASE("sample_shots is deterministic and exhausts small corpora") {
  const auto d = shot_corpus();
  const auto a = sample_shots(d, 3, 9);
  const auto b = sample_shots(d, 3, 9);
  CHECK(a.train == b.train);
  CHECK(a.unlabeled == b.unlabeled);

  Dataset small{conll_schema(), {d.sentences[0], d.sentences[1], d.sentences[2]}, true};
  const auto all = sample_shots(small, 100, 1);
  CHECK(all.train.sentences.size() == 3);
  CHECK(all.unlabeled.sentences.empty());
  CHECK(all.warnings.size() == 4);
  CHECK_THROWS_AS(sample_shots(small, 0, 1), Error);
}
