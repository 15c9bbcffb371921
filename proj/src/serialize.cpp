#include "neraug/serialize.hpp"

#include <fstream>

#include "neraug/linearizer.hpp"

namespace neraug {

namespace {

TypeId type_from_tag(const Json& j, const LabelSchema& schema) {
  const auto tag = j.get<std::string>();
  const auto t = schema.find_tag(tag);
  if (!t) throw Error(ErrorCode::UnknownTag, "type '" + tag + "' not in schema");
  return *t;
}

}  // namespace

Json to_json(const MaskSlot& slot, const LabelSchema& schema) {
  Json j;
  j["slot"] = slot.slot_id;
  j["kind"] = slot.kind == SlotKind::EntityWords ? "entity" : "context";
  if (slot.constraint) {
    j["constraint"] = schema.tag(*slot.constraint);
    j["display_name"] = schema.display_name(*slot.constraint);
  }
  j["op"] = to_string(slot.origin);
  return j;
}

Json to_json(const std::vector<TemplatePiece>& pieces, const LabelSchema& schema) {
  Json arr = Json::array();
  for (const auto& p : pieces) {
    if (const auto* text = std::get_if<std::string>(&p)) arr.push_back(Json{{"text", *text}});
    else arr.push_back(to_json(std::get<MaskSlot>(p), schema));
  }
  return arr;
}

std::vector<TemplatePiece> pieces_from_json(const Json& j, const LabelSchema& schema) {
  std::vector<TemplatePiece> out;
  for (const auto& p : j) {
    if (p.contains("text")) {
      out.emplace_back(p.at("text").get<std::string>());
      continue;
    }
    MaskSlot slot;
    slot.slot_id = p.at("slot").get<std::size_t>();
    slot.kind = p.at("kind").get<std::string>() == "entity" ? SlotKind::EntityWords : SlotKind::ContextWords;
    if (p.contains("constraint")) slot.constraint = type_from_tag(p.at("constraint"), schema);
    if (slot.kind == SlotKind::EntityWords && !slot.constraint)
      throw Error(ErrorCode::SlotMismatch, "entity slot without a type constraint");
    slot.origin = op_from_string(p.value("op", "op5"));
    out.emplace_back(slot);
  }
  return out;
}

Json to_json(const AppliedOp& op, const LabelSchema& schema) {
  Json j;
  j["op"] = to_string(op.kind);
  j["target"] = op.target;
  if (op.old_type) j["old_type"] = schema.tag(*op.old_type);
  if (op.new_type) j["new_type"] = schema.tag(*op.new_type);
  j["left"] = op.left_masked;
  j["right"] = op.right_masked;
  return j;
}

AppliedOp applied_op_from_json(const Json& j, const LabelSchema& schema) {
  AppliedOp op;
  op.kind = op_from_string(j.at("op").get<std::string>());
  op.target = j.at("target").get<std::size_t>();
  if (j.contains("old_type")) op.old_type = type_from_tag(j.at("old_type"), schema);
  if (j.contains("new_type")) op.new_type = type_from_tag(j.at("new_type"), schema);
  op.left_masked = j.value("left", std::size_t{0});
  op.right_masked = j.value("right", std::size_t{0});
  return op;
}

Json to_json(const MaskedTemplate& t, const LabelSchema& schema) {
  Json j;
  j["parent_id"] = t.parent_id();
  j["pieces"] = to_json(t.pieces(schema), schema);
  Json types = Json::array();
  for (auto id : t.expected_types()) types.push_back(schema.tag(id));
  j["expected_types"] = types;
  Json prov = Json::array();
  for (const auto& op : t.provenance()) prov.push_back(to_json(op, schema));
  j["provenance"] = prov;
  return j;
}

Json to_json(const FillRequest& r, const LabelSchema& schema) {
  return Json{{"request_id", r.request_id},
              {"template", {{"pieces", to_json(r.pieces, schema)}}},
              {"decode",
               {{"max_new_tokens", r.decode.max_new_tokens},
                {"temperature", r.decode.temperature},
                {"seed", r.decode.seed}}}};
}

FillRequest fill_request_from_json(const Json& j, const LabelSchema& schema) {
  FillRequest r;
  r.request_id = j.at("request_id").get<std::string>();
  r.pieces = pieces_from_json(j.at("template").at("pieces"), schema);
  if (j.contains("decode")) {
    const auto& d = j.at("decode");
    r.decode.max_new_tokens = d.value("max_new_tokens", r.decode.max_new_tokens);
    r.decode.temperature = d.value("temperature", r.decode.temperature);
    r.decode.seed = d.value("seed", r.decode.seed);
  }
  return r;
}

Json to_json(const FillResponse& r) {
  return Json{{"request_id", r.request_id}, {"filled_text", r.filled_text}, {"per_slot_fills", r.per_slot_fills}};
}

FillResponse fill_response_from_json(const Json& j) {
  FillResponse r;
  r.request_id = j.value("request_id", std::string{});
  r.filled_text = j.value("filled_text", std::string{});
  if (j.contains("per_slot_fills")) r.per_slot_fills = j.at("per_slot_fills").get<std::vector<std::vector<std::string>>>();
  return r;
}

Json to_json(const TypeScoreRequest& r) {
  return Json{{"request_id", r.request_id}, {"text", r.text}, {"placeholder", r.placeholder}, {"slots", r.slot_count}};
}

TypeScoreRequest type_score_request_from_json(const Json& j) {
  return TypeScoreRequest{j.at("request_id").get<std::string>(), j.at("text").get<std::string>(),
                          j.value("placeholder", std::string("<MASK>")), j.at("slots").get<std::size_t>()};
}

Json to_json(const TypeScoreResponse& r) {
  Json j{{"request_id", r.request_id}, {"names", r.names}};
  if (!r.scores.empty()) j["scores"] = r.scores;
  return j;
}

TypeScoreResponse type_score_response_from_json(const Json& j) {
  TypeScoreResponse r;
  r.request_id = j.value("request_id", std::string{});
  r.names = j.at("names").get<std::vector<std::string>>();
  if (j.contains("scores")) r.scores = j.at("scores").get<std::vector<double>>();
  return r;
}

Json to_json(const TaggedSentence& s, const LabelSchema& schema) {
  Json spans = Json::array();
  for (const auto& sp : s.spans) spans.push_back(Json::array({sp.start, sp.end, schema.tag(sp.type)}));
  return Json{{"id", s.id}, {"tokens", s.tokens}, {"spans", spans}};
}

TaggedSentence sentence_from_json(const Json& j, const LabelSchema& schema) {
  TaggedSentence s;
  s.id = j.at("id").get<std::string>();
  s.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& sp : j.at("spans"))
    s.spans.push_back({sp.at(0).get<std::size_t>(), sp.at(1).get<std::size_t>(), type_from_tag(sp.at(2), schema)});
  validate_sentence(s, schema);
  return s;
}

Json to_json(const AugmentedSample& s, const LabelSchema& schema) {
  Json j;
  j["id"] = s.id;
  j["parent_id"] = s.parent_id;
  j["strategy"] = to_string(s.strategy);
  Json ops = Json::array();
  for (const auto& op : s.ops) ops.push_back(to_json(op, schema));
  j["ops"] = ops;
  j["flipped_positions"] = s.flipped_positions;
  const auto sentence = to_json(s.sentence, schema);
  j["tokens"] = sentence["tokens"];
  j["spans"] = sentence["spans"];
  j["linearized"] = linearize_string(s.sentence, schema);
  Json types = Json::array();
  for (auto t : s.sentence.type_sequence()) types.push_back(schema.tag(t));
  j["expected_types"] = types;
  if (s.verdict != FilterVerdict::Pending) j["filter_verdict"] = to_string(s.verdict);
  return j;
}

AugmentedSample sample_from_json(const Json& j, const LabelSchema& schema) {
  AugmentedSample s;
  s.id = j.at("id").get<std::string>();
  s.parent_id = j.at("parent_id").get<std::string>();
  s.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  for (const auto& op : j.value("ops", Json::array())) s.ops.push_back(applied_op_from_json(op, schema));
  s.flipped_positions = j.value("flipped_positions", std::vector<std::size_t>{});
  s.sentence = sentence_from_json(Json{{"id", s.id}, {"tokens", j.at("tokens")}, {"spans", j.at("spans")}}, schema);
  if (j.contains("filter_verdict")) s.verdict = verdict_from_string(j.at("filter_verdict").get<std::string>());
  return s;
}

std::vector<AugmentedSample> read_samples(std::istream& in, const LabelSchema& schema) {
  std::vector<AugmentedSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(sample_from_json(Json::parse(line), schema));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::MalformedLine, "sample line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<AugmentedSample> load_samples(const std::string& path, const LabelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open sample file " + path);
  return read_samples(in, schema);
}

void write_samples(std::ostream& out, const std::vector<AugmentedSample>& samples, const LabelSchema& schema) {
  for (const auto& s : samples) out << to_json(s, schema).dump() << '\n';
}

Json error_body(const Error& e) { return Json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}}; }

std::string_view to_string(FilterVerdict v) noexcept {
  switch (v) {
    case FilterVerdict::Pending: return "pending";
    case FilterVerdict::Kept: return "kept";
    case FilterVerdict::DroppedMismatch: return "dropped_mismatch";
    case FilterVerdict::DroppedUnparseable: return "dropped_unparseable";
  }
  return "?";
}

FilterVerdict verdict_from_string(std::string_view name) {
  for (auto v : {FilterVerdict::Pending, FilterVerdict::Kept, FilterVerdict::DroppedMismatch,
                 FilterVerdict::DroppedUnparseable})
    if (to_string(v) == name) return v;
  throw Error(ErrorCode::MalformedLine, "unknown filter verdict '" + std::string(name) + "'");
}

}  // namespace neraug
