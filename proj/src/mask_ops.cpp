#include "neraug/mask_ops.hpp"

#include <algorithm>

#include "neraug/error.hpp"

namespace neraug {

std::string_view to_string(OpKind op) noexcept {
  switch (op) {
    case OpKind::Op1: return "op1";
    case OpKind::Op2: return "op2";
    case OpKind::Op3: return "op3";
    case OpKind::Op4: return "op4";
    case OpKind::Op5: return "op5";
  }
  return "op?";
}

OpKind op_from_string(std::string_view name) {
  for (auto op : {OpKind::Op1, OpKind::Op2, OpKind::Op3, OpKind::Op4, OpKind::Op5})
    if (to_string(op) == name) return op;
  throw Error(ErrorCode::ConfigError, "unknown operation '" + std::string(name) + "'");
}

void OpConfig::validate() const {
  if (context_mask_min > context_mask_max)
    throw Error(ErrorCode::ConfigError, "context_mask_min must not exceed context_mask_max");
  if (placeholder.empty()) throw Error(ErrorCode::ConfigError, "placeholder must be non-empty");
}

MaskedTemplate::MaskedTemplate(const SegmentedSentence& s) : parent_id_(s.id) {
  for (const auto& seg : s.segments) {
    if (seg.is_entity()) {
      elements_.push_back(EntityGroup{seg.tokens, *seg.type, std::nullopt, false});
    } else {
      original_context_tokens_ += seg.tokens.size();
      for (const auto& t : seg.tokens) elements_.push_back(Word{t});
    }
  }
}

std::vector<TypeId> MaskedTemplate::expected_types() const {
  std::vector<TypeId> out;
  for (const auto& e : elements_)
    if (const auto* g = std::get_if<EntityGroup>(&e)) out.push_back(g->type);
  return out;
}

std::vector<std::size_t> MaskedTemplate::flipped_positions() const {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  for (const auto& e : elements_) {
    if (const auto* g = std::get_if<EntityGroup>(&e)) {
      if (g->flipped) out.push_back(pos);
      ++pos;
    }
  }
  return out;
}

std::vector<MaskSlot> MaskedTemplate::slots() const {
  std::vector<MaskSlot> out;
  for (const auto& e : elements_) {
    if (const auto* c = std::get_if<ContextSlot>(&e)) {
      out.push_back({out.size(), SlotKind::ContextWords, std::nullopt, c->origin});
    } else if (const auto* g = std::get_if<EntityGroup>(&e); g && g->slotted_by) {
      out.push_back({out.size(), SlotKind::EntityWords, g->type, *g->slotted_by});
    }
  }
  return out;
}

std::size_t MaskedTemplate::slot_count() const { return slots().size(); }

std::vector<TemplatePiece> MaskedTemplate::pieces(const LabelSchema& schema) const {
  std::vector<TemplatePiece> out;
  std::size_t next_slot = 0;
  auto literal = [&](std::string_view tok) {
    if (out.empty() || !std::holds_alternative<std::string>(out.back())) out.emplace_back(std::string{});
    auto& text = std::get<std::string>(out.back());
    if (!text.empty()) text += ' ';
    text += tok;
  };
  for (const auto& e : elements_) {
    if (const auto* w = std::get_if<Word>(&e)) {
      literal(escape_token(w->token));
    } else if (const auto* c = std::get_if<ContextSlot>(&e)) {
      out.emplace_back(MaskSlot{next_slot++, SlotKind::ContextWords, std::nullopt, c->origin});
    } else {
      const auto& g = std::get<EntityGroup>(e);
      literal(kOpenBracket);
      if (g.slotted_by) {
        out.emplace_back(MaskSlot{next_slot++, SlotKind::EntityWords, g.type, *g.slotted_by});
      } else {
        for (const auto& t : g.tokens) literal(escape_token(t));
      }
      literal(kSeparator);
      literal(schema.display_name(g.type));
      literal(kCloseBracket);
    }
  }
  return out;
}

LinearizedText MaskedTemplate::render(const LabelSchema& schema, std::string_view placeholder) const {
  std::vector<std::vector<std::string>> fills(slot_count(), std::vector<std::string>{std::string(placeholder)});
  LinearizedText out;
  std::size_t slot = 0;
  for (const auto& piece : pieces(schema)) {
    if (const auto* text = std::get_if<std::string>(&piece)) {
      auto toks = LinearizedText::from_string(*text);
      out.tokens.insert(out.tokens.end(), toks.tokens.begin(), toks.tokens.end());
    } else {
      out.tokens.push_back(fills[slot++].front());
    }
  }
  return out;
}

LinearizedText MaskedTemplate::fill(const LabelSchema& schema, const std::vector<std::vector<std::string>>& fills) const {
  const auto expected = slots();
  if (fills.size() != expected.size())
    throw Error(ErrorCode::SlotMismatch, "template has " + std::to_string(expected.size()) + " slots, got " +
                                             std::to_string(fills.size()) + " fills");
  LinearizedText out;
  for (const auto& piece : pieces(schema)) {
    if (const auto* text = std::get_if<std::string>(&piece)) {
      auto toks = LinearizedText::from_string(*text);
      out.tokens.insert(out.tokens.end(), toks.tokens.begin(), toks.tokens.end());
      continue;
    }
    const auto& slot = std::get<MaskSlot>(piece);
    std::size_t emitted = 0;
    for (const auto& raw : fills[slot.slot_id]) {
      for (const auto& tok : LinearizedText::from_string(raw).tokens) {
        out.tokens.push_back(escape_token(tok));
        ++emitted;
      }
    }
    if (slot.kind == SlotKind::EntityWords && emitted == 0)
      throw Error(ErrorCode::SlotMismatch, "entity slot " + std::to_string(slot.slot_id) + " filled with no words");
  }
  return out;
}

std::vector<std::size_t> MaskedTemplate::literal_entities() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < elements_.size(); ++i)
    if (const auto* g = std::get_if<EntityGroup>(&elements_[i]); g && !g->slotted_by) out.push_back(i);
  return out;
}

std::size_t MaskedTemplate::pick_entity(Rng& rng, std::optional<std::size_t> target) const {
  if (target) {
    const auto* g = *target < elements_.size() ? std::get_if<EntityGroup>(&elements_[*target]) : nullptr;
    if (!g || g->slotted_by) throw Error(ErrorCode::OverlapExhausted, "paired target is no longer a literal entity");
    return *target;
  }
  const auto candidates = literal_entities();
  if (candidates.empty()) {
    const bool any_entity = std::any_of(elements_.begin(), elements_.end(),
                                        [](const Element& e) { return std::holds_alternative<EntityGroup>(e); });
    if (!any_entity) throw Error(ErrorCode::NoEntity, "sentence " + parent_id_ + " has no entity");
    throw Error(ErrorCode::OverlapExhausted, "every entity of " + parent_id_ + " is already masked");
  }
  return candidates[uniform_index(rng, 0, candidates.size() - 1)];
}

std::size_t MaskedTemplate::entity_ordinal(std::size_t element) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < element; ++i)
    if (std::holds_alternative<EntityGroup>(elements_[i])) ++n;
  return n;
}

// Replaces up to `count` literal words directly left of `element` by one
// context slot. Returns the number of words masked; `element` shifts left by
// (masked - 1) when masked > 0.
std::size_t MaskedTemplate::mask_left(std::size_t element, std::size_t count, OpKind origin) {
  std::size_t first = element;
  while (first > 0 && element - first < count && std::holds_alternative<Word>(elements_[first - 1])) --first;
  const std::size_t masked = element - first;
  if (masked == 0) return 0;
  elements_.erase(elements_.begin() + static_cast<std::ptrdiff_t>(first),
                  elements_.begin() + static_cast<std::ptrdiff_t>(element));
  elements_.insert(elements_.begin() + static_cast<std::ptrdiff_t>(first), ContextSlot{origin});
  return masked;
}

std::size_t MaskedTemplate::mask_right(std::size_t element, std::size_t count, OpKind origin) {
  std::size_t last = element + 1;
  while (last < elements_.size() && last - element - 1 < count && std::holds_alternative<Word>(elements_[last])) ++last;
  const std::size_t masked = last - element - 1;
  if (masked == 0) return 0;
  elements_.erase(elements_.begin() + static_cast<std::ptrdiff_t>(element + 1),
                  elements_.begin() + static_cast<std::ptrdiff_t>(last));
  elements_.insert(elements_.begin() + static_cast<std::ptrdiff_t>(element + 1), ContextSlot{origin});
  return masked;
}

std::size_t MaskedTemplate::slot_entity(const OpConfig& cfg, Rng& rng, std::size_t idx, OpKind origin, AppliedOp& rec) {
  const auto left = uniform_index(rng, cfg.context_mask_min, cfg.context_mask_max);
  const auto right = uniform_index(rng, cfg.context_mask_min, cfg.context_mask_max);
  std::get<EntityGroup>(elements_[idx]).slotted_by = origin;
  rec.left_masked = mask_left(idx, left, origin);
  if (rec.left_masked > 0) idx -= rec.left_masked - 1;
  rec.right_masked = mask_right(idx, right, origin);
  return idx;
}

std::size_t MaskedTemplate::augment_entity_span(const OpConfig& cfg, Rng& rng, std::optional<std::size_t> target) {
  auto idx = pick_entity(rng, target);
  const auto& g = std::get<EntityGroup>(elements_[idx]);
  AppliedOp rec{OpKind::Op1, entity_ordinal(idx), g.type, g.type, 0, 0};
  idx = slot_entity(cfg, rng, idx, OpKind::Op1, rec);
  provenance_.push_back(rec);
  return idx;
}

std::size_t MaskedTemplate::change_entity_type(const OpConfig& cfg, Rng& rng, const FlipPicker& pick,
                                               std::optional<std::size_t> target) {
  auto idx = pick_entity(rng, target);
  auto& g = std::get<EntityGroup>(elements_[idx]);
  const TypeId next = pick(g.type, rng);
  if (next == g.type) throw Error(ErrorCode::SameType, "replacement type equals the current type");
  AppliedOp rec{OpKind::Op2, entity_ordinal(idx), g.type, next, 0, 0};
  g.type = next;
  g.flipped = true;
  idx = slot_entity(cfg, rng, idx, OpKind::Op2, rec);
  provenance_.push_back(rec);
  return idx;
}

std::size_t MaskedTemplate::add_entity(const OpConfig&, Rng& rng, const FlipPicker& pick,
                                       std::optional<std::size_t> target) {
  const auto idx = pick_entity(rng, target);
  const auto current = std::get<EntityGroup>(elements_[idx]).type;
  const TypeId next = pick(current, rng);
  AppliedOp rec{OpKind::Op3, entity_ordinal(idx), current, next, 0, 0};
  const auto at = elements_.begin() + static_cast<std::ptrdiff_t>(idx + 1);
  elements_.insert(at, {Element{ContextSlot{OpKind::Op3}}, Element{EntityGroup{{}, next, OpKind::Op3, true}},
                        Element{ContextSlot{OpKind::Op3}}});
  provenance_.push_back(rec);
  return idx;
}

std::size_t MaskedTemplate::erase_entity(const OpConfig& cfg, Rng& rng, std::optional<std::size_t> target) {
  auto idx = pick_entity(rng, target);
  const auto& g = std::get<EntityGroup>(elements_[idx]);
  AppliedOp rec{OpKind::Op4, entity_ordinal(idx), g.type, std::nullopt, 0, 0};
  const auto left = uniform_index(rng, cfg.context_mask_min, cfg.context_mask_max);
  const auto right = uniform_index(rng, cfg.context_mask_min, cfg.context_mask_max);
  std::size_t first = idx;
  while (first > 0 && idx - first < left && std::holds_alternative<Word>(elements_[first - 1])) --first;
  std::size_t last = idx + 1;
  while (last < elements_.size() && last - idx - 1 < right && std::holds_alternative<Word>(elements_[last])) ++last;
  rec.left_masked = idx - first;
  rec.right_masked = last - idx - 1;
  elements_.erase(elements_.begin() + static_cast<std::ptrdiff_t>(first),
                  elements_.begin() + static_cast<std::ptrdiff_t>(last));
  elements_.insert(elements_.begin() + static_cast<std::ptrdiff_t>(first), ContextSlot{OpKind::Op4});
  provenance_.push_back(rec);
  return first;
}

std::size_t MaskedTemplate::augment_context(const OpConfig&, Rng& rng) {
  // Maximal runs of literal words: [begin, end) element ranges.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < elements_.size();) {
    if (!std::holds_alternative<Word>(elements_[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < elements_.size() && std::holds_alternative<Word>(elements_[j])) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  if (runs.empty()) {
    if (original_context_tokens_ == 0) throw Error(ErrorCode::NoContext, "sentence " + parent_id_ + " has no context words");
    throw Error(ErrorCode::OverlapExhausted, "every context word of " + parent_id_ + " is already masked");
  }
  const auto run = uniform_index(rng, 0, runs.size() - 1);
  const auto [begin, end] = runs[run];
  const auto length = uniform_index(rng, 1, end - begin);
  const auto start = begin + uniform_index(rng, 0, (end - begin) - length);
  elements_.erase(elements_.begin() + static_cast<std::ptrdiff_t>(start),
                  elements_.begin() + static_cast<std::ptrdiff_t>(start + length));
  elements_.insert(elements_.begin() + static_cast<std::ptrdiff_t>(start), ContextSlot{OpKind::Op5});
  provenance_.push_back(AppliedOp{OpKind::Op5, run, std::nullopt, std::nullopt, start - begin, length});
  return start;
}

std::size_t MaskedTemplate::apply(const OpSpec& op, const OpConfig& cfg, Rng& rng, const FlipPicker& pick,
                                  std::optional<std::size_t> anchor) {
  const auto target = op.pairs_with_previous ? anchor : std::nullopt;
  if (op.pairs_with_previous && !anchor)
    throw Error(ErrorCode::OverlapExhausted, "paired op has no preceding anchor");
  FlipPicker chooser = pick;
  if (op.new_type) {
    const TypeId pinned = *op.new_type;
    chooser = [pinned](TypeId, Rng&) { return pinned; };
  }
  if (is_flip_op(op.kind) && op.kind != OpKind::Op4 && !chooser)
    throw Error(ErrorCode::ConfigError, std::string(to_string(op.kind)) + " needs a flip target");
  switch (op.kind) {
    case OpKind::Op1: return augment_entity_span(cfg, rng, target);
    case OpKind::Op2: return change_entity_type(cfg, rng, chooser, target);
    case OpKind::Op3: return add_entity(cfg, rng, chooser, target);
    case OpKind::Op4: return erase_entity(cfg, rng, target);
    case OpKind::Op5: return augment_context(cfg, rng);
  }
  return 0;
}

namespace {

FlipPicker pinned(TypeId t) {
  return [t](TypeId, Rng&) { return t; };
}

}  // namespace

MaskedTemplate op1_augment_entity_span(const SegmentedSentence& s, const OpConfig& cfg, Rng& rng) {
  MaskedTemplate t(s);
  t.augment_entity_span(cfg, rng);
  return t;
}

MaskedTemplate op2_change_entity_type(const SegmentedSentence& s, TypeId new_type, const OpConfig& cfg, Rng& rng) {
  MaskedTemplate t(s);
  t.change_entity_type(cfg, rng, pinned(new_type));
  return t;
}

MaskedTemplate op3_add_entity(const SegmentedSentence& s, TypeId new_type, const OpConfig& cfg, Rng& rng) {
  MaskedTemplate t(s);
  t.add_entity(cfg, rng, pinned(new_type));
  return t;
}

MaskedTemplate op4_erase_entity(const SegmentedSentence& s, const OpConfig& cfg, Rng& rng) {
  MaskedTemplate t(s);
  t.erase_entity(cfg, rng);
  return t;
}

MaskedTemplate op5_augment_context(const SegmentedSentence& s, const OpConfig& cfg, Rng& rng) {
  MaskedTemplate t(s);
  t.augment_context(cfg, rng);
  return t;
}

MaskedTemplate compose_template(const SegmentedSentence& s, const std::vector<OpSpec>& ops, const OpConfig& cfg,
                                Rng& rng, const FlipPicker& pick) {
  cfg.validate();
  MaskedTemplate t(s);
  std::optional<std::size_t> anchor;
  for (const auto& op : ops) anchor = t.apply(op, cfg, rng, pick, anchor);
  return t;
}

}  // namespace neraug
