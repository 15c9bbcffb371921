#pragma once

#include <string>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/rng.hpp"

namespace neraug::testing {

inline LabelSchema conll_schema() {
  return LabelSchema({{"PER", "person"}, {"ORG", "organization"}, {"LOC", "location"}, {"MISC", "miscellaneous"}});
}

inline LabelSchema restaurant_schema() {
  return LabelSchema({{"Rating", "rating"}, {"Price", "price"}, {"Amenity", "amenity"}, {"Cuisine", "cuisine"}});
}

/// "find me a [nice | rating] place to eat that is [not too expensive | price]"
inline TaggedSentence restaurant_sentence() {
  return {"r0",
          {"find", "me", "a", "nice", "place", "to", "eat", "that", "is", "not", "too", "expensive"},
          {{3, 4, TypeId{0}}, {9, 12, TypeId{1}}}};
}

/// "[Bonds | person] came out of Wednesday 's game against [New York | organization] ..."
inline TaggedSentence bonds_sentence() {
  return {"c0",
          {"Bonds", "came", "out", "of", "Wednesday", "'s", "game", "against", "New", "York", "in", "the",
           "ninth", "inning", "after", "suffering", "a", "mild", "hamstring", "strain", "."},
          {{0, 1, TypeId{0}}, {8, 10, TypeId{1}}}};
}

/// Random sentence over a small vocabulary that includes reserved symbols,
/// backslash-prefixed tokens and display-name lookalikes. Produces adjacent
/// entities, entities at both boundaries and empty contexts.
inline TaggedSentence random_sentence(Rng& rng, std::size_t type_count, const std::string& id,
                                      std::size_t max_len = 14) {
  static const std::vector<std::string> vocab = {
      "the", "a", "game", "[", "]", "|", "\\", "\\[", "\\|", "\\\\x", "person", "New", "York", "<MASK>",
      "x|y", "[a]", "co-op", "'s", ".", ",", "Müller", "東京"};
  TaggedSentence s;
  s.id = id;
  const auto len = uniform_index(rng, 0, max_len);
  for (std::size_t i = 0; i < len; ++i) s.tokens.push_back(vocab[uniform_index(rng, 0, vocab.size() - 1)]);
  std::size_t pos = 0;
  while (pos < len) {
    if (uniform_index(rng, 0, 2) == 0) {
      const auto end = pos + 1 + uniform_index(rng, 0, std::min<std::size_t>(2, len - pos - 1));
      s.spans.push_back({pos, end, TypeId{uniform_index(rng, 0, type_count - 1)}});
      pos = end;
    } else {
      ++pos;
    }
  }
  return s;
}

}  // namespace neraug::testing

#include "neraug/mock_backend.hpp"

namespace neraug::testing {

inline std::string data_path(const std::string& rel) { return std::string(NERAUG_DATA_DIR) + "/" + rel; }

inline Dataset toy_corpus() {
  return load_conll(data_path("toy.conll"), LabelSchema::load(data_path("conll_schema.tsv")));
}

inline MockLexicons toy_lexicons(const Dataset& absorb = {}) {
  MockLexicons lex;
  for (const auto& name : {"person", "organization", "location", "miscellaneous"})
    lex.entities[name] = MockLexicons::load_list(data_path(std::string("lexicon/") + name + ".txt"));
  lex.context = MockLexicons::load_list(data_path("lexicon/context.txt"));
  lex.absorb(absorb);
  return lex;
}

}  // namespace neraug::testing
