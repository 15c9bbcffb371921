#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "neraug/augment.hpp"

using namespace neraug;
using namespace neraug::testing;

namespace {

std::string dump(const std::vector<AugmentedSample>& samples, const LabelSchema& schema) {
  std::ostringstream out;
  write_samples(out, samples, schema);
  return out.str();
}

std::size_t hamming(const std::vector<TypeId>& a, const std::vector<TypeId>& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

}  // namespace

TEST_CASE("augment reconciles planned, generated and skipped counts") {
  const auto d = toy_corpus();
  MockBackend mock(d.schema, toy_lexicons(d), 3);
  AugmentConfig cfg;
  cfg.multiplier = 3;
  cfg.seed = 17;
  cfg.retry.base_delay = std::chrono::milliseconds(0);
  const auto result = augment(d, cfg, mock);
  const auto total = result.report.total();
  CHECK(total.planned == d.sentences.size() * 4 * 3);
  CHECK(total.generated == result.samples.size());
  CHECK(total.reconciles());
  for (const auto& [s, c] : result.report.per_strategy) {
    CHECK(c.planned == d.sentences.size() * 3);
    CHECK(c.reconciles());
  }
  // The entity-free sentence cannot feed label-flipping strategies.
  CHECK(result.report.per_strategy.at(Strategy::ELC).skipped.at("NoEntity") > 0);
  CHECK(total.fill_failed_total() == 0);
  CHECK(result.report.to_json()["total"]["reconciles"].get<bool>());
}

TEST_CASE("augmented samples carry the edits of their strategy") {
  const auto d = toy_corpus();
  MockBackend mock(d.schema, toy_lexicons(d), 3);
  AugmentConfig cfg;
  cfg.seed = 5;
  cfg.multiplier = 2;
  const auto result = augment(d, cfg, mock);
  std::map<std::string, const TaggedSentence*> parents;
  for (const auto& s : d.sentences) parents[s.id] = &s;
  for (const auto& sample : result.samples) {
    const auto original = parents.at(sample.parent_id)->type_sequence();
    const auto types = sample.sentence.type_sequence();
    switch (sample.strategy) {
      case Strategy::SA: CHECK(types == original); break;
      case Strategy::ELC:
        REQUIRE(types.size() == original.size());
        CHECK(hamming(types, original) == 1);
        break;
      case Strategy::EA: CHECK(types.size() == original.size() + 1); break;
      case Strategy::ER:
        REQUIRE(types.size() == original.size());
        CHECK(hamming(types, original) == 1);
        break;
    }
    CHECK(sample.flipped_positions.size() == (sample.label_flipping() ? 1u : 0u));
    CHECK(sample.id.rfind(sample.parent_id + "#", 0) == 0);
  }
}

TEST_CASE("augment is deterministic and independent of worker count") {
  const auto d = toy_corpus();
  MockBackend mock(d.schema, toy_lexicons(d), 8);
  AugmentConfig cfg;
  cfg.seed = 99;
  cfg.max_in_flight = 1;
  const auto a = augment(d, cfg, mock);
  cfg.max_in_flight = 8;
  const auto b = augment(d, cfg, mock);
  CHECK(dump(a.samples, d.schema) == dump(b.samples, d.schema));
  CHECK(a.report.to_json().dump() == b.report.to_json().dump());
  cfg.seed = 100;
  CHECK(dump(augment(d, cfg, mock).samples, d.schema) != dump(a.samples, d.schema));
}

TEST_CASE("sample JSON lines round-trip") {
  const auto d = toy_corpus();
  MockBackend mock(d.schema, toy_lexicons(d), 8);
  AugmentConfig cfg;
  cfg.strategies = {Strategy::ER};
  const auto a = augment(d, cfg, mock);
  const auto text = dump(a.samples, d.schema);
  std::istringstream in(text);
  CHECK(dump(read_samples(in, d.schema), d.schema) == text);
}

TEST_CASE("plan_templates exposes the masked templates") {
  const auto d = toy_corpus();
  AugmentConfig cfg;
  cfg.strategies = {Strategy::SA};
  AugmentReport report;
  const auto templates = plan_templates(d, cfg, &report);
  CHECK(templates.size() + report.total().skipped_total() == d.sentences.size());
  for (const auto& [id, t] : templates) CHECK(t.slot_count() > 0);
}
