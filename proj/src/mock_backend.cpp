#include "neraug/mock_backend.hpp"

#include <algorithm>
#include <fstream>

#include "neraug/linearizer.hpp"
#include "neraug/rng.hpp"

namespace neraug {

namespace {

std::string join(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += words[i];
  }
  return out;
}

std::string request_key(const FillRequest& req) {
  std::string key;
  for (const auto& p : req.pieces) {
    if (const auto* text = std::get_if<std::string>(&p)) {
      key += *text;
    } else {
      const auto& slot = std::get<MaskSlot>(p);
      key += slot.kind == SlotKind::EntityWords ? "\x01E" + std::to_string(slot.constraint->value) : "\x01C";
    }
    key += '\x02';
  }
  return key;
}

}  // namespace

void MockLexicons::absorb(const Dataset& d) {
  for (const auto& s : d.sentences) {
    for (const auto& sp : s.spans) {
      auto& list = entities[d.schema.display_name(sp.type)];
      auto entry = join(s.tokens, sp.start, sp.end);
      if (std::find(list.begin(), list.end(), entry) == list.end()) list.push_back(std::move(entry));
    }
  }
}

std::vector<std::string> MockLexicons::load_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open lexicon " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto toks = LinearizedText::from_string(line).tokens;
    if (!toks.empty()) out.push_back(join(toks, 0, toks.size()));
  }
  return out;
}

MockBackend::MockBackend(LabelSchema schema, MockLexicons lexicons, std::uint64_t seed)
    : schema_(std::move(schema)), lexicons_(std::move(lexicons)), seed_(seed) {
  for (std::size_t t = 0; t < schema_.size(); ++t) {
    const auto& name = schema_.display_name(TypeId{t});
    auto it = lexicons_.entities.find(name);
    if (it == lexicons_.entities.end()) continue;
    for (const auto& entry : it->second) entity_type_.emplace(entry, name);
  }
}

FillResponse MockBackend::fill(const FillRequest& req) {
  Rng rng = derive_stream(seed_ ^ splitmix64(req.decode.seed), request_key(req));
  FillResponse resp{req.request_id, {}, {}};
  for (const auto& p : req.pieces) {
    const auto* slot = std::get_if<MaskSlot>(&p);
    if (!slot) continue;
    std::vector<std::string> words;
    if (slot->kind == SlotKind::EntityWords) {
      const auto& name = schema_.display_name(*slot->constraint);
      const auto it = lexicons_.entities.find(name);
      if (it == lexicons_.entities.end() || it->second.empty()) {
        words.push_back(name);
      } else {
        words = LinearizedText::from_string(it->second[uniform_index(rng, 0, it->second.size() - 1)]).tokens;
      }
    } else if (!lexicons_.context.empty()) {
      const auto n = uniform_index(rng, 1, 3);
      for (std::size_t i = 0; i < n; ++i)
        words.push_back(lexicons_.context[uniform_index(rng, 0, lexicons_.context.size() - 1)]);
    }
    resp.per_slot_fills.push_back(std::move(words));
  }
  resp.filled_text = assemble_fill(req.pieces, resp.per_slot_fills);
  return resp;
}

TypeScoreResponse MockBackend::score_types(const TypeScoreRequest& req) {
  TypeScoreResponse resp{req.request_id, {}, {}};
  for (const auto& words : type_query_entities(req)) {
    const auto it = entity_type_.find(join(words, 0, words.size()));
    resp.names.push_back(it == entity_type_.end() ? "unknown" : it->second);
    resp.scores.push_back(it == entity_type_.end() ? 0.0 : 1.0);
  }
  return resp;
}

void OracleScorer::set_gold(const std::string& query_text, std::vector<std::string> names) {
  gold_[query_text] = std::move(names);
}

TypeScoreResponse OracleScorer::score_types(const TypeScoreRequest& req) {
  const auto it = gold_.find(req.text);
  if (it == gold_.end()) return inner_.score_types(req);
  return TypeScoreResponse{req.request_id, it->second, std::vector<double>(it->second.size(), 1.0)};
}

AdversaryScorer::AdversaryScorer(GenerationBackend& inner, const LabelSchema& schema, std::set<std::string> corrupt_ids,
                                 std::size_t position)
    : inner_(inner), schema_(schema), corrupt_(std::move(corrupt_ids)), position_(position) {}

TypeScoreResponse AdversaryScorer::score_types(const TypeScoreRequest& req) {
  auto resp = inner_.score_types(req);
  if (resp.names.empty() || !corrupt_.contains(req.request_id)) return resp;
  auto& name = resp.names[std::min(position_, resp.names.size() - 1)];
  const auto current = schema_.find_display_name(name);
  const std::size_t next = current ? (current->value + 1) % schema_.size() : 0;
  name = schema_.display_name(TypeId{next});
  if (current && next == current->value) name = "unknown";
  return resp;
}

}  // namespace neraug
