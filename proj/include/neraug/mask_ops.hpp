#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/linearizer.hpp"
#include "neraug/rng.hpp"

namespace neraug {

enum class OpKind { Op1, Op2, Op3, Op4, Op5 };

std::string_view to_string(OpKind op) noexcept;
OpKind op_from_string(std::string_view name);
constexpr bool is_flip_op(OpKind op) noexcept { return op == OpKind::Op2 || op == OpKind::Op3 || op == OpKind::Op4; }

enum class SlotKind { EntityWords, ContextWords };

struct MaskSlot {
  std::size_t slot_id = 0;
  SlotKind kind = SlotKind::ContextWords;
  std::optional<TypeId> constraint;
  OpKind origin = OpKind::Op5;
  friend bool operator==(const MaskSlot&, const MaskSlot&) = default;
};

/// Literal linearized text or a slot. Consecutive literals are merged.
using TemplatePiece = std::variant<std::string, MaskSlot>;

struct OpConfig {
  std::size_t context_mask_min = 0;
  std::size_t context_mask_max = 2;
  std::string placeholder = "<MASK>";

  void validate() const;
};

/// Record of one applied operation, in application order.
struct AppliedOp {
  OpKind kind = OpKind::Op1;
  /// Entity ordinal (Op1-Op4) or context run ordinal (Op5) at the time of
  /// application.
  std::size_t target = 0;
  std::optional<TypeId> old_type;
  std::optional<TypeId> new_type;
  std::size_t left_masked = 0;
  std::size_t right_masked = 0;
};

/// Picks the replacement type for a label-flipping op given the current type.
using FlipPicker = std::function<TypeId(TypeId current, Rng& rng)>;

/// A linearized sentence under construction by the masking operations.
/// Elements are literal context words, context slots, or entity groups whose
/// words are either literal or a single entity slot.
class MaskedTemplate {
 public:
  struct Word {
    std::string token;
  };
  struct ContextSlot {
    OpKind origin;
  };
  struct EntityGroup {
    std::vector<std::string> tokens;
    TypeId type;
    std::optional<OpKind> slotted_by;
    bool flipped = false;
  };
  using Element = std::variant<Word, ContextSlot, EntityGroup>;

  MaskedTemplate() = default;
  explicit MaskedTemplate(const SegmentedSentence& s);

  const std::string& parent_id() const noexcept { return parent_id_; }
  const std::vector<Element>& elements() const noexcept { return elements_; }
  const std::vector<AppliedOp>& provenance() const noexcept { return provenance_; }

  std::vector<TypeId> expected_types() const;
  /// Positions in expected_types whose type was introduced by a flip op.
  std::vector<std::size_t> flipped_positions() const;
  std::vector<MaskSlot> slots() const;
  std::size_t slot_count() const;

  std::vector<TemplatePiece> pieces(const LabelSchema& schema) const;
  /// Slots rendered as the placeholder token.
  LinearizedText render(const LabelSchema& schema, std::string_view placeholder = "<MASK>") const;

  /// Substitutes raw (unescaped) fill tokens slot by slot. Entity fills must be
  /// non-empty; context fills may be empty.
  LinearizedText fill(const LabelSchema& schema, const std::vector<std::vector<std::string>>& fills) const;

  // Operations; each returns the element index of the entity it anchored on
  // (Op1-Op4) or of the inserted context slot (Op5).
  std::size_t augment_entity_span(const OpConfig& cfg, Rng& rng,
                                  std::optional<std::size_t> target = std::nullopt);
  std::size_t change_entity_type(const OpConfig& cfg, Rng& rng, const FlipPicker& pick,
                                 std::optional<std::size_t> target = std::nullopt);
  std::size_t add_entity(const OpConfig& cfg, Rng& rng, const FlipPicker& pick,
                         std::optional<std::size_t> target = std::nullopt);
  std::size_t erase_entity(const OpConfig& cfg, Rng& rng, std::optional<std::size_t> target = std::nullopt);
  std::size_t augment_context(const OpConfig& cfg, Rng& rng);

  /// Dispatches one OpSpec. `anchor` is the element returned by the previous
  /// op, used when the spec pairs with it.
  std::size_t apply(const struct OpSpec& op, const OpConfig& cfg, Rng& rng, const FlipPicker& pick,
                    std::optional<std::size_t> anchor = std::nullopt);

 private:
  std::vector<std::size_t> literal_entities() const;
  std::size_t pick_entity(Rng& rng, std::optional<std::size_t> target) const;
  std::size_t entity_ordinal(std::size_t element) const;
  std::size_t mask_left(std::size_t element, std::size_t count, OpKind origin);
  std::size_t mask_right(std::size_t element, std::size_t count, OpKind origin);
  std::size_t slot_entity(const OpConfig& cfg, Rng& rng, std::size_t idx, OpKind origin, AppliedOp& rec);

  std::string parent_id_;
  std::vector<Element> elements_;
  std::vector<AppliedOp> provenance_;
  std::size_t original_context_tokens_ = 0;
};

/// Applies the five fundamental operations to a fresh template.
MaskedTemplate op1_augment_entity_span(const SegmentedSentence& s, const OpConfig& cfg, Rng& rng);
MaskedTemplate op2_change_entity_type(const SegmentedSentence& s, TypeId new_type, const OpConfig& cfg, Rng& rng);
MaskedTemplate op3_add_entity(const SegmentedSentence& s, TypeId new_type, const OpConfig& cfg, Rng& rng);
MaskedTemplate op4_erase_entity(const SegmentedSentence& s, const OpConfig& cfg, Rng& rng);
MaskedTemplate op5_augment_context(const SegmentedSentence& s, const OpConfig& cfg, Rng& rng);

/// One step of a composed masking plan. `new_type` pins the flip target;
/// otherwise the picker passed to compose_template chooses it. An Op4 with
/// `pairs_with_previous` erases the entity anchored by the preceding Op3.
struct OpSpec {
  OpSpec() = default;
  OpSpec(OpKind k, std::optional<TypeId> type = std::nullopt, bool paired = false)
      : kind(k), new_type(type), pairs_with_previous(paired) {}

  OpKind kind = OpKind::Op1;
  std::optional<TypeId> new_type;
  bool pairs_with_previous = false;
  friend bool operator==(const OpSpec&, const OpSpec&) = default;
};

/// Applies ops in order to one evolving template. An op never targets
/// tokens already slotted by an earlier op.
MaskedTemplate compose_template(const SegmentedSentence& s, const std::vector<OpSpec>& ops, const OpConfig& cfg,
                                Rng& rng, const FlipPicker& pick = {});

}  // namespace neraug
