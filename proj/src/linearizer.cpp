#include "neraug/linearizer.hpp"

#include <sstream>

#include "neraug/error.hpp"

namespace neraug {

SegmentedSentence segment(const TaggedSentence& s) {
  SegmentedSentence out{s.id, {}};
  std::size_t pos = 0;
  for (const auto& sp : s.spans) {
    out.segments.push_back({{s.tokens.begin() + static_cast<std::ptrdiff_t>(pos),
                             s.tokens.begin() + static_cast<std::ptrdiff_t>(sp.start)},
                            std::nullopt});
    out.segments.push_back({{s.tokens.begin() + static_cast<std::ptrdiff_t>(sp.start),
                             s.tokens.begin() + static_cast<std::ptrdiff_t>(sp.end)},
                            sp.type});
    pos = sp.end;
  }
  out.segments.push_back({{s.tokens.begin() + static_cast<std::ptrdiff_t>(pos), s.tokens.end()}, std::nullopt});
  return out;
}

TaggedSentence unsegment(const SegmentedSentence& s) {
  TaggedSentence out{s.id, {}, {}};
  for (const auto& seg : s.segments) {
    if (seg.is_entity()) out.spans.push_back({out.tokens.size(), out.tokens.size() + seg.tokens.size(), *seg.type});
    out.tokens.insert(out.tokens.end(), seg.tokens.begin(), seg.tokens.end());
  }
  return out;
}

bool is_reserved(std::string_view t) noexcept {
  return t == kOpenBracket || t == kCloseBracket || t == kSeparator || (!t.empty() && t.front() == '\\');
}

std::string escape_token(std::string_view token) {
  return is_reserved(token) ? "\\" + std::string(token) : std::string(token);
}

std::string unescape_token(std::string_view token) {
  if (token.size() > 1 && token.front() == '\\') token.remove_prefix(1);
  return std::string(token);
}

std::string LinearizedText::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

LinearizedText LinearizedText::from_string(std::string_view text) {
  LinearizedText out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.tokens.push_back(tok);
  return out;
}

LinearizedText linearize(const TaggedSentence& s, const LabelSchema& schema) {
  LinearizedText out;
  out.tokens.reserve(s.tokens.size() + 4 * s.spans.size());
  std::size_t pos = 0;
  auto copy_context = [&](std::size_t end) {
    for (; pos < end; ++pos) out.tokens.push_back(escape_token(s.tokens[pos]));
  };
  for (const auto& sp : s.spans) {
    if (sp.type.value >= schema.size())
      throw Error(ErrorCode::UnknownType, "sentence " + s.id + ": span type not in schema");
    copy_context(sp.start);
    out.tokens.emplace_back(kOpenBracket);
    copy_context(sp.end);
    out.tokens.emplace_back(kSeparator);
    auto name = LinearizedText::from_string(schema.display_name(sp.type));
    out.tokens.insert(out.tokens.end(), name.tokens.begin(), name.tokens.end());
    out.tokens.emplace_back(kCloseBracket);
  }
  copy_context(s.tokens.size());
  return out;
}

std::string linearize_string(const TaggedSentence& s, const LabelSchema& schema) {
  return linearize(s, schema).str();
}

TaggedSentence delinearize(const LinearizedText& text, const LabelSchema& schema, std::string id) {
  enum class State { Outside, Entity, Name };
  TaggedSentence out{std::move(id), {}, {}};
  State state = State::Outside;
  std::size_t entity_start = 0;
  std::string name;
  for (std::size_t i = 0; i < text.tokens.size(); ++i) {
    const auto& tok = text.tokens[i];
    const auto where = " at token " + std::to_string(i);
    switch (state) {
      case State::Outside:
        if (tok == kOpenBracket) {
          state = State::Entity;
          entity_start = out.tokens.size();
        } else if (tok == kCloseBracket || tok == kSeparator) {
          throw Error(ErrorCode::UnbalancedBrackets, "'" + tok + "' outside an entity group" + where);
        } else {
          out.tokens.push_back(unescape_token(tok));
        }
        break;
      case State::Entity:
        if (tok == kOpenBracket) throw Error(ErrorCode::UnbalancedBrackets, "nested '['" + where);
        if (tok == kCloseBracket) throw Error(ErrorCode::MissingSeparator, "entity group closed without '|'" + where);
        if (tok == kSeparator) {
          if (out.tokens.size() == entity_start) throw Error(ErrorCode::EmptyEntity, "entity group has no words" + where);
          state = State::Name;
          name.clear();
        } else {
          out.tokens.push_back(unescape_token(tok));
        }
        break;
      case State::Name:
        if (tok == kOpenBracket) throw Error(ErrorCode::UnbalancedBrackets, "nested '['" + where);
        if (tok == kSeparator) throw Error(ErrorCode::MissingSeparator, "second '|' in one entity group" + where);
        if (tok == kCloseBracket) {
          const auto type = schema.find_display_name(name);
          if (!type) throw Error(ErrorCode::UnknownDisplayName, "'" + name + "'" + where);
          out.spans.push_back({entity_start, out.tokens.size(), *type});
          state = State::Outside;
        } else {
          if (!name.empty()) name += ' ';
          name += unescape_token(tok);
        }
        break;
    }
  }
  if (state != State::Outside) throw Error(ErrorCode::UnbalancedBrackets, "unterminated entity group");
  return out;
}

TaggedSentence delinearize(std::string_view text, const LabelSchema& schema, std::string id) {
  return delinearize(LinearizedText::from_string(text), schema, std::move(id));
}

}  // namespace neraug
