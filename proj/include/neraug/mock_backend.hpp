#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/gateway.hpp"

namespace neraug {

/// Word lists for the mock generator. Entries may span several words.
struct MockLexicons {
  std::map<std::string, std::vector<std::string>> entities;  // keyed by display name
  std::vector<std::string> context;

  /// Adds every entity of the dataset to the lexicon of its type.
  void absorb(const Dataset& d);
  static std::vector<std::string> load_list(const std::string& path);
};

/// Deterministic stand-in for a trained generator. Entity slots draw from the
/// lexicon of their constraint type, context slots draw 1-3 context words.
/// Word2Type predicts the type whose lexicon contains the entity words
/// (first in schema order) or "unknown". Responses are a pure function of
/// (request, seed, lexicons).
class MockBackend : public GenerationBackend {
 public:
  MockBackend(LabelSchema schema, MockLexicons lexicons, std::uint64_t seed);

  FillResponse fill(const FillRequest& req) override;
  TypeScoreResponse score_types(const TypeScoreRequest& req) override;

  const MockLexicons& lexicons() const noexcept { return lexicons_; }

 private:
  LabelSchema schema_;
  MockLexicons lexicons_;
  std::uint64_t seed_;
  std::unordered_map<std::string, std::string> entity_type_;
};

/// Word2Type oracle keyed by query text; fill is delegated.
class OracleScorer : public GenerationBackend {
 public:
  explicit OracleScorer(GenerationBackend& inner) : inner_(inner) {}

  void set_gold(const std::string& query_text, std::vector<std::string> names);

  FillResponse fill(const FillRequest& req) override { return inner_.fill(req); }
  TypeScoreResponse score_types(const TypeScoreRequest& req) override;

 private:
  GenerationBackend& inner_;
  std::unordered_map<std::string, std::vector<std::string>> gold_;
};

/// Corrupts the predicted name at `position` for the listed request ids.
class AdversaryScorer : public GenerationBackend {
 public:
  AdversaryScorer(GenerationBackend& inner, const LabelSchema& schema, std::set<std::string> corrupt_ids,
                  std::size_t position = 0);

  FillResponse fill(const FillRequest& req) override { return inner_.fill(req); }
  TypeScoreResponse score_types(const TypeScoreRequest& req) override;

 private:
  GenerationBackend& inner_;
  LabelSchema schema_;
  std::set<std::string> corrupt_;
  std::size_t position_;
};

}  // namespace neraug
