#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neraug/augment.hpp"
#include "neraug/filter.hpp"
#include "neraug/metrics.hpp"
#include "neraug/mixup.hpp"
#include "neraug/strategy.hpp"

namespace neraug {

enum class BackendKind { Mock, Http };

std::string_view to_string(BackendKind b) noexcept;
BackendKind backend_from_string(std::string_view name);

/// Everything a pipeline run depends on. Loaded from `key = value` lines;
/// relative paths resolve against the config file's directory.
struct RunConfig {
  // data
  std::string train_path;
  std::string unlabeled_path;
  std::string test_path;
  std::string schema_path;
  /// Few-shot sampling per type; 0 uses the training file as given.
  std::size_t shots = 0;

  // augmentation
  std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::size_t multiplier = 1;
  StrategyConfig strategy;
  FlipScheme flip;
  OpConfig ops;
  DecodeOptions decode;

  // filtering and mixup
  QueryMode query_mode = QueryMode::Joint;
  MixupConfig mixup;
  AlignMode mixup_align = AlignMode::Pad;

  // self-training
  double tau = 0.9;
  std::size_t iterations = 3;
  ConfidencePolicy confidence = ConfidencePolicy::Min;
  /// Whether the re-annotated unlabeled pool is confidence-gated before
  /// retraining in the second loop.
  bool filter_reannotated = true;

  std::uint64_t seed = 0;

  // backends
  BackendKind backend = BackendKind::Mock;
  std::string backend_url = "http://127.0.0.1:8000";
  std::string trainer_url;  // defaults to backend_url
  /// Mock lexicon files keyed by display name, plus "context".
  std::map<std::string, std::string> lexicons;
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};

  std::string out_dir = "out";

  /// Applies one key. Unknown keys and malformed values raise ConfigError.
  void set(const std::string& key, const std::string& value, const std::string& base_dir = "");
  void validate() const;

  AugmentConfig augment_config(std::uint64_t seed) const;
  FilterOptions filter_options() const;

  /// Canonical `key = value` text: stable ordering, used for the manifest.
  std::string canonical() const;
};

RunConfig parse_config(std::istream& in, const std::string& base_dir = "");
RunConfig load_config(const std::string& path);

}  // namespace neraug
