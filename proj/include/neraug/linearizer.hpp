#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neraug/corpus.hpp"

namespace neraug {

/// A context segment (no type) or an entity segment (non-empty, typed).
struct Segment {
  std::vector<std::string> tokens;
  std::optional<TypeId> type;

  bool is_entity() const noexcept { return type.has_value(); }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Alternating C1 E1 C2 ... En C(n+1); contexts may be empty.
struct SegmentedSentence {
  std::string id;
  std::vector<Segment> segments;

  std::size_t entity_count() const noexcept { return segments.size() / 2; }
  const Segment& context(std::size_t i) const { return segments.at(2 * i); }
  const Segment& entity(std::size_t i) const { return segments.at(2 * i + 1); }
  friend bool operator==(const SegmentedSentence&, const SegmentedSentence&) = default;
};

SegmentedSentence segment(const TaggedSentence& s);
TaggedSentence unsegment(const SegmentedSentence& s);

inline constexpr std::string_view kOpenBracket = "[";
inline constexpr std::string_view kCloseBracket = "]";
inline constexpr std::string_view kSeparator = "|";

/// Whitespace-joined token stream "... [ w1 w2 | display name ] ...".
struct LinearizedText {
  std::vector<std::string> tokens;

  std::string str() const;
  static LinearizedText from_string(std::string_view text);
  friend bool operator==(const LinearizedText&, const LinearizedText&) = default;
};

/// Reserved tokens and tokens starting with a backslash gain one backslash.
std::string escape_token(std::string_view token);
std::string unescape_token(std::string_view token);
bool is_reserved(std::string_view raw_token) noexcept;

LinearizedText linearize(const TaggedSentence& s, const LabelSchema& schema);
std::string linearize_string(const TaggedSentence& s, const LabelSchema& schema);

TaggedSentence delinearize(const LinearizedText& text, const LabelSchema& schema, std::string id = {});
TaggedSentence delinearize(std::string_view text, const LabelSchema& schema, std::string id = {});

}  // namespace neraug
