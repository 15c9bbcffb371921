#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/error.hpp"
#include "neraug/mask_ops.hpp"

namespace neraug {

struct DecodeOptions {
  std::size_t max_new_tokens = 32;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

struct FillRequest {
  std::string request_id;
  std::vector<TemplatePiece> pieces;
  DecodeOptions decode;

  std::size_t slot_count() const;
};

struct FillResponse {
  std::string request_id;
  std::string filled_text;
  std::vector<std::vector<std::string>> per_slot_fills;
};

/// A linearized sentence whose display names are each replaced by one
/// placeholder token.
struct TypeScoreRequest {
  std::string request_id;
  std::string text;
  std::string placeholder = "<MASK>";
  std::size_t slot_count = 0;
};

struct TypeScoreResponse {
  std::string request_id;
  std::vector<std::string> names;
  std::vector<double> scores;
};

/// Mask-filling and type-scoring service. Implementations must be safe for
/// concurrent calls. Transport faults throw Error(BackendUnavailable).
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual FillResponse fill(const FillRequest& req) = 0;
  virtual TypeScoreResponse score_types(const TypeScoreRequest& req) = 0;
};

struct RetryPolicy {
  /// Retries after the first attempt.
  std::size_t retries = 3;
  std::chrono::milliseconds base_delay{50};
};

FillRequest make_fill_request(const MaskedTemplate& t, const LabelSchema& schema, std::string request_id,
                              const DecodeOptions& decode = {});

/// Joins the literal pieces with raw fills substituted (escaped) for slots.
std::string assemble_fill(const std::vector<TemplatePiece>& pieces,
                          const std::vector<std::vector<std::string>>& fills);

/// Fills every slot through the backend. The response's filled text must
/// parse and carry the template's display names in order; malformed
/// generations are retried and end in UnparseableGeneration. A template
/// without slots is answered locally.
FillResponse fill(const FillRequest& req, GenerationBackend& backend, const LabelSchema& schema,
                  const RetryPolicy& policy = {});

TypeScoreResponse score_types(const TypeScoreRequest& req, GenerationBackend& backend,
                              const RetryPolicy& policy = {});

/// Output order matches input order. Failures are reported per request.
std::vector<Result<FillResponse>> fill_batch(const std::vector<FillRequest>& reqs, GenerationBackend& backend,
                                             const LabelSchema& schema, std::size_t max_in_flight,
                                             const RetryPolicy& policy = {});

std::vector<Result<TypeScoreResponse>> score_batch(const std::vector<TypeScoreRequest>& reqs,
                                                   GenerationBackend& backend, std::size_t max_in_flight,
                                                   const RetryPolicy& policy = {});

}  // namespace neraug

namespace neraug {

/// Entity words of each type slot in a Word2Type query, left to right.
std::vector<std::vector<std::string>> type_query_entities(const TypeScoreRequest& req);

}  // namespace neraug
