#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/gateway.hpp"
#include "neraug/mask_ops.hpp"
#include "neraug/sample.hpp"
#include "neraug/serialize.hpp"
#include "neraug/strategy.hpp"

namespace neraug {

struct AugmentConfig {
  std::vector<Strategy> strategies{Strategy::SA, Strategy::ELC, Strategy::EA, Strategy::ER};
  /// Samples planned per (sentence, strategy).
  std::size_t multiplier = 1;
  StrategyConfig strategy;
  FlipScheme flip;
  OpConfig ops;
  DecodeOptions decode;
  std::uint64_t seed = 0;
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
};

/// Per-strategy bookkeeping. planned == generated + skipped + fill_failed.
struct AugmentCounts {
  std::size_t planned = 0;
  std::size_t generated = 0;
  /// Samples abandoned because an op precondition failed, by error code.
  std::map<std::string, std::size_t> skipped;
  /// Samples whose generation failed after retries, by error code.
  std::map<std::string, std::size_t> fill_failed;
  /// Label-preserving ops dropped from a plan for lack of a target.
  std::size_t op_skips = 0;

  std::size_t skipped_total() const;
  std::size_t fill_failed_total() const;
  bool reconciles() const { return planned == generated + skipped_total() + fill_failed_total(); }
};

struct AugmentReport {
  std::size_t sentences = 0;
  std::size_t multiplier = 0;
  std::map<Strategy, AugmentCounts> per_strategy;

  AugmentCounts total() const;
  Json to_json() const;
};

struct AugmentResult {
  std::vector<AugmentedSample> samples;
  AugmentReport report;
};

/// Builds one masked template per (sentence, strategy, copy), fills them
/// through the backend and parses the results back into tagged sentences.
/// A failing label-flipping op abandons its sample; a label-preserving op
/// without a target is dropped from the plan. Templates left without any
/// slot are skipped as "NoSlots".
AugmentResult augment(const Dataset& d, const AugmentConfig& cfg, GenerationBackend& backend);

/// Masked templates only, for inspection (`augment --templates-only`).
std::vector<std::pair<std::string, MaskedTemplate>> plan_templates(const Dataset& d, const AugmentConfig& cfg,
                                                                   AugmentReport* report = nullptr);

}  // namespace neraug
