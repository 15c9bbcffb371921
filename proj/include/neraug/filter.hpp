#pragma once

#include <map>
#include <string>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/gateway.hpp"
#include "neraug/sample.hpp"
#include "neraug/serialize.hpp"

namespace neraug {

/// input == kept + dropped_mismatch + dropped_unparseable
struct FilterCounts {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t dropped_mismatch = 0;
  std::size_t dropped_unparseable = 0;
  /// Subset of dropped_unparseable: the backend could not be reached.
  std::size_t unavailable = 0;

  double retention() const noexcept { return input == 0 ? 1.0 : static_cast<double>(kept) / static_cast<double>(input); }
  FilterCounts& operator+=(const FilterCounts& o);
};

struct FilterReport {
  std::map<Strategy, FilterCounts> per_strategy;

  FilterCounts total() const;
  void merge(const FilterReport& other);
  Json to_json() const;
  /// Fixed-width table, one row per strategy plus a total row.
  std::string table() const;
};

enum class QueryMode {
  /// All display names masked in one query.
  Joint,
  /// One query per entity, the other names left visible.
  OneAtATime,
};

struct FilterOptions {
  QueryMode mode = QueryMode::Joint;
  std::string placeholder = "<MASK>";
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
};

/// Linearized form of the sample with every display name replaced by one
/// placeholder token. The request id is the sample id.
TypeScoreRequest make_word2type_query(const AugmentedSample& sample, const LabelSchema& schema,
                                      std::string_view placeholder = "<MASK>");

/// Query masking only the display name of entity `position`.
TypeScoreRequest make_single_type_query(const AugmentedSample& sample, const LabelSchema& schema,
                                        std::size_t position, std::string_view placeholder = "<MASK>");

struct FilterResult {
  std::vector<AugmentedSample> kept;
  std::vector<AugmentedSample> dropped;
  FilterReport report;
};

/// Keeps a sample iff the regenerated display names equal its own at every
/// position (lowercase, trimmed). Samples without entities are kept without a
/// backend call; backend failures drop the sample as unparseable.
FilterResult filter(std::vector<AugmentedSample> samples, GenerationBackend& backend, const LabelSchema& schema,
                    const FilterOptions& options = {});

}  // namespace neraug
