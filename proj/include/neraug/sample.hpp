#pragma once

#include <string>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/mask_ops.hpp"
#include "neraug/strategy.hpp"

namespace neraug {

enum class FilterVerdict { Pending, Kept, DroppedMismatch, DroppedUnparseable };

std::string_view to_string(FilterVerdict v) noexcept;
FilterVerdict verdict_from_string(std::string_view name);

/// A generated sentence with its provenance. The sentence's type sequence is
/// the expected type sequence of the template it was filled from.
struct AugmentedSample {
  std::string id;
  std::string parent_id;
  Strategy strategy = Strategy::SA;
  std::vector<AppliedOp> ops;
  std::vector<std::size_t> flipped_positions;
  TaggedSentence sentence;
  FilterVerdict verdict = FilterVerdict::Pending;

  bool label_flipping() const noexcept { return is_label_flipping(strategy); }
};

}  // namespace neraug
