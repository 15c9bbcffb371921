#include <doctest.h>

#include <set>
#include <tuple>

#include "fixtures.hpp"
#include "neraug/error.hpp"
#include "neraug/mask_ops.hpp"

using namespace neraug;
using namespace neraug::testing;

namespace {

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

std::size_t count_slots(const MaskedTemplate& t, SlotKind kind) {
  std::size_t n = 0;
  for (const auto& s : t.slots()) n += s.kind == kind ? 1 : 0;
  return n;
}

// Element index of the i-th entity group.
std::size_t entity_element(const MaskedTemplate& t, std::size_t ordinal) {
  for (std::size_t i = 0; i < t.elements().size(); ++i)
    if (std::holds_alternative<MaskedTemplate::EntityGroup>(t.elements()[i]) && ordinal-- == 0) return i;
  FAIL("no such entity");
  return 0;
}

FlipPicker to(TypeId t) {
  return [t](TypeId, Rng&) { return t; };
}

}  // namespace

TEST_CASE("op1 with zero context masks only the entity") {
  const auto schema = restaurant_schema();
  TaggedSentence s{"x", {"go", "to", "Joe's"}, {{2, 3, TypeId{3}}}};
  Rng rng(1);
  const auto t = op1_augment_entity_span(segment(s), OpConfig{0, 0}, rng);
  CHECK(t.render(schema).str() == "go to [ <MASK> | cuisine ]");
  CHECK(t.expected_types() == s.type_sequence());
  CHECK(t.slot_count() == 1);
}

TEST_CASE("op1 with maximal context on a pinned entity") {
  const auto schema = restaurant_schema();
  MaskedTemplate t(segment(restaurant_sentence()));
  Rng rng(3);
  t.augment_entity_span(OpConfig{2, 2}, rng, entity_element(t, 0));
  CHECK(t.render(schema).str() ==
        "find <MASK> [ <MASK> | rating ] <MASK> eat that is [ not too expensive | price ]");
  const auto slots = t.slots();
  REQUIRE(slots.size() == 3);
  CHECK(slots[0].kind == SlotKind::ContextWords);
  CHECK(slots[1].kind == SlotKind::EntityWords);
  CHECK(slots[1].constraint == TypeId{0});
  for (std::size_t i = 0; i < slots.size(); ++i) CHECK(slots[i].slot_id == i);
}

TEST_CASE("op1 slot extents over a seed sweep match the hand enumeration") {
  // Entity 0 ("nice") has 3 words to its left and 5 to its right; entity 1
  // ("not too expensive") has 5 to its left and none to its right. Per-side
  // extents are uniform in [0, 2] clipped to what is available.
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> expected;
  for (std::size_t l = 0; l <= 2; ++l)
    for (std::size_t r = 0; r <= 2; ++r) expected.insert({0, l, r});
  for (std::size_t l = 0; l <= 2; ++l) expected.insert({1, l, 0});

  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  const auto seg = segment(restaurant_sentence());
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto t = op1_augment_entity_span(seg, OpConfig{}, rng);
    const auto& rec = t.provenance().at(0);
    seen.insert({rec.target, rec.left_masked, rec.right_masked});
  }
  CHECK(seen == expected);
}

TEST_CASE("op2 changes exactly one type") {
  const auto schema = conll_schema();
  MaskedTemplate t(segment(bonds_sentence()));
  Rng rng(5);
  t.change_entity_type(OpConfig{}, rng, to(TypeId{3}), entity_element(t, 1));
  CHECK(t.expected_types() == std::vector<TypeId>{TypeId{0}, TypeId{3}});
  CHECK(t.flipped_positions() == std::vector<std::size_t>{1});
  REQUIRE(count_slots(t, SlotKind::EntityWords) == 1);
  for (const auto& slot : t.slots())
    if (slot.kind == SlotKind::EntityWords) CHECK(slot.constraint == TypeId{3});

  Rng rng2(5);
  CHECK(error_of([&] { op2_change_entity_type(segment(TaggedSentence{"s", {"A"}, {{0, 1, TypeId{0}}}}), TypeId{0},
                                              OpConfig{}, rng2); }) == ErrorCode::SameType);
  CHECK(error_of([&] { op2_change_entity_type(segment(TaggedSentence{"s", {"a"}, {}}), TypeId{0}, OpConfig{}, rng2); }) ==
        ErrorCode::NoEntity);
}

TEST_CASE("op3 inserts a typed slot group after the chosen entity") {
  const auto schema = conll_schema();
  MaskedTemplate t(segment(bonds_sentence()));
  Rng rng(11);
  t.add_entity(OpConfig{}, rng, to(TypeId{1}), entity_element(t, 0));
  CHECK(t.render(schema).str() ==
        "[ Bonds | person ] <MASK> [ <MASK> | organization ] <MASK> came out of Wednesday 's game against "
        "[ New York | organization ] in the ninth inning after suffering a mild hamstring strain .");
  CHECK(t.expected_types() == std::vector<TypeId>{TypeId{0}, TypeId{1}, TypeId{1}});
  CHECK(t.flipped_positions() == std::vector<std::size_t>{1});
}

TEST_CASE("op4 erases an entity") {
  const auto schema = conll_schema();
  TaggedSentence one{"o", {"I", "saw", "Paris", "today"}, {{2, 3, TypeId{2}}}};
  Rng rng(2);
  const auto t = op4_erase_entity(segment(one), OpConfig{}, rng);
  CHECK(t.expected_types().empty());
  CHECK(count_slots(t, SlotKind::ContextWords) == 1);

  MaskedTemplate two(segment(bonds_sentence()));
  two.erase_entity(OpConfig{0, 0}, rng, entity_element(two, 0));
  CHECK(two.expected_types() == std::vector<TypeId>{TypeId{1}});
  CHECK(two.render(schema).str().rfind("<MASK> came out of", 0) == 0);
}

TEST_CASE("op5 only touches context words") {
  TaggedSentence plain{"p", {"a", "b", "c"}, {}};
  Rng rng(4);
  const auto t = op5_augment_context(segment(plain), OpConfig{}, rng);
  CHECK(t.expected_types().empty());
  CHECK(t.slot_count() == 1);

  TaggedSentence only_entity{"e", {"Paris"}, {{0, 1, TypeId{2}}}};
  CHECK(error_of([&] { op5_augment_context(segment(only_entity), OpConfig{}, rng); }) == ErrorCode::NoContext);
}

TEST_CASE("compose_template") {
  const auto schema = conll_schema();
  const auto seg = segment(bonds_sentence());
  Rng rng(8);
  CHECK(compose_template(seg, {}, OpConfig{}, rng).render(schema) == linearize(bonds_sentence(), schema));

  const std::vector<OpSpec> elc = {{OpKind::Op2}, {OpKind::Op1}, {OpKind::Op5}, {OpKind::Op5}, {OpKind::Op5}};
  std::size_t exhausted = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    MaskedTemplate t;
    try {
      t = compose_template(seg, elc, OpConfig{}, r, to(TypeId{3}));
    } catch (const Error& e) {
      // Op5 may consume whole context runs, leaving nothing for later Op5s.
      CHECK(e.code() == ErrorCode::OverlapExhausted);
      ++exhausted;
      continue;
    }
    CHECK(t.flipped_positions().size() == 1);
    CHECK(count_slots(t, SlotKind::EntityWords) >= 2);
    CHECK(count_slots(t, SlotKind::ContextWords) >= 3);
    std::size_t diff = 0;
    const auto types = t.expected_types();
    REQUIRE(types.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) diff += types[i] != seg.entity(i).type ? 1 : 0;
    CHECK(diff == 1);
  }
  CHECK(exhausted < 25);

  // Op3 then a paired Op4 replaces the anchor in place.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    const auto t = compose_template(seg, {{OpKind::Op3}, {OpKind::Op4, std::nullopt, true}}, OpConfig{}, r,
                                    to(TypeId{2}));
    const auto types = t.expected_types();
    REQUIRE(types.size() == 2);
    const auto target = t.provenance()[0].target;
    CHECK(t.provenance()[1].target == target);
    CHECK(types[target] == TypeId{2});
    CHECK(types[1 - target] == seg.entity(1 - target).type);
  }

  // Exhaustion: one entity cannot be slotted twice.
  TaggedSentence one{"o", {"Paris"}, {{0, 1, TypeId{2}}}};
  CHECK(error_of([&] { compose_template(segment(one), {{OpKind::Op1}, {OpKind::Op1}}, OpConfig{}, rng); }) ==
        ErrorCode::OverlapExhausted);
}

TEST_CASE("fill substitutes escaped tokens and keeps type literals") {
  const auto schema = conll_schema();
  MaskedTemplate t(segment(bonds_sentence()));
  Rng rng(1);
  t.change_entity_type(OpConfig{0, 0}, rng, to(TypeId{3}), entity_element(t, 1));
  const auto filled = t.fill(schema, {{"European", "|"}});
  const auto s = delinearize(filled, schema);
  CHECK(s.type_sequence() == t.expected_types());
  CHECK(s.tokens[8] == "European");
  CHECK(s.tokens[9] == "|");
  CHECK(error_of([&] { t.fill(schema, {}); }) == ErrorCode::SlotMismatch);
  CHECK(error_of([&] { t.fill(schema, {{}}); }) == ErrorCode::SlotMismatch);
}

TEST_CASE("operation invariants over fuzzed sentences") {
  const auto schema = conll_schema();
  const auto flip = [](TypeId cur, Rng&) { return TypeId{(cur.value + 1) % 4}; };
  Rng gen(99);
  std::size_t applied = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_sentence(gen, schema.size(), "z" + std::to_string(i));
    const auto seg = segment(s);
    const auto original = s.type_sequence();
    for (auto op : {OpKind::Op1, OpKind::Op2, OpKind::Op3, OpKind::Op4, OpKind::Op5}) {
      Rng a(static_cast<std::uint64_t>(i) * 7 + static_cast<std::uint64_t>(op));
      Rng b = a;
      MaskedTemplate t(seg);
      MaskedTemplate u(seg);
      try {
        t.apply(OpSpec{op}, OpConfig{}, a, flip);
      } catch (const Error& e) {
        CHECK((e.code() == ErrorCode::NoEntity || e.code() == ErrorCode::NoContext));
        continue;
      }
      u.apply(OpSpec{op}, OpConfig{}, b, flip);
      ++applied;
      CHECK(t.render(schema) == u.render(schema));

      const auto types = t.expected_types();
      switch (op) {
        case OpKind::Op1:
        case OpKind::Op5: CHECK(types == original); break;
        case OpKind::Op2: {
          REQUIRE(types.size() == original.size());
          std::size_t diff = 0;
          for (std::size_t k = 0; k < types.size(); ++k) diff += types[k] != original[k] ? 1 : 0;
          CHECK(diff == 1);
          break;
        }
        case OpKind::Op3: CHECK(types.size() == original.size() + 1); break;
        case OpKind::Op4: CHECK(types.size() + 1 == original.size()); break;
      }
      // The placeholder rendering parses under the linearized grammar.
      const auto parsed = delinearize(t.render(schema, "\xE2\x90\xA3MASK\xE2\x90\xA3"), schema);
      CHECK(parsed.type_sequence() == types);
      if (op == OpKind::Op5) {
        for (const auto& slot : t.slots()) CHECK(slot.kind == SlotKind::ContextWords);
      }
    }
  }
  CHECK(applied > 2000);
}
