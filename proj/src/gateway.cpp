#include "neraug/gateway.hpp"

#include <thread>
#include <type_traits>

#include "neraug/linearizer.hpp"
#include "neraug/parallel.hpp"

namespace neraug {

std::size_t FillRequest::slot_count() const {
  std::size_t n = 0;
  for (const auto& p : pieces) n += std::holds_alternative<MaskSlot>(p) ? 1 : 0;
  return n;
}

FillRequest make_fill_request(const MaskedTemplate& t, const LabelSchema& schema, std::string request_id,
                              const DecodeOptions& decode) {
  return FillRequest{std::move(request_id), t.pieces(schema), decode};
}

std::string assemble_fill(const std::vector<TemplatePiece>& pieces, const std::vector<std::vector<std::string>>& fills) {
  std::string out;
  auto append = [&](std::string_view tok) {
    if (!out.empty()) out += ' ';
    out += tok;
  };
  for (const auto& p : pieces) {
    if (const auto* text = std::get_if<std::string>(&p)) {
      if (!text->empty()) append(*text);
      continue;
    }
    const auto id = std::get<MaskSlot>(p).slot_id;
    if (id >= fills.size()) throw Error(ErrorCode::SlotMismatch, "no fill for slot " + std::to_string(id));
    for (const auto& raw : fills[id])
      for (const auto& tok : LinearizedText::from_string(raw).tokens) append(escape_token(tok));
  }
  return out;
}

namespace {

bool retryable(ErrorCode code) {
  return code == ErrorCode::BackendUnavailable || code == ErrorCode::UnparseableGeneration ||
         code == ErrorCode::SlotMismatch;
}

template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& attempt) -> std::invoke_result_t<Fn&> {
  for (std::size_t i = 0;; ++i) {
    try {
      return attempt();
    } catch (const Error& e) {
      if (!retryable(e.code()) || i >= policy.retries) throw;
    }
    if (policy.base_delay.count() > 0) std::this_thread::sleep_for(policy.base_delay * (1LL << i));
  }
}

std::vector<TypeId> expected_types(const std::vector<TemplatePiece>& pieces, const LabelSchema& schema) {
  std::vector<std::vector<std::string>> placeholders;
  for (const auto& p : pieces)
    if (std::holds_alternative<MaskSlot>(p)) placeholders.push_back({"x"});
  return delinearize(assemble_fill(pieces, placeholders), schema).type_sequence();
}

}  // namespace

FillResponse fill(const FillRequest& req, GenerationBackend& backend, const LabelSchema& schema,
                  const RetryPolicy& policy) {
  const auto slots = req.slot_count();
  if (slots == 0) return FillResponse{req.request_id, assemble_fill(req.pieces, {}), {}};
  const auto expected = expected_types(req.pieces, schema);
  return with_retries(policy, [&] {
    auto resp = backend.fill(req);
    if (resp.per_slot_fills.size() != slots)
      throw Error(ErrorCode::SlotMismatch, req.request_id + ": expected " + std::to_string(slots) + " slot fills, got " +
                                               std::to_string(resp.per_slot_fills.size()));
    if (resp.filled_text.empty()) resp.filled_text = assemble_fill(req.pieces, resp.per_slot_fills);
    std::vector<TypeId> got;
    try {
      got = delinearize(resp.filled_text, schema).type_sequence();
    } catch (const Error& e) {
      throw Error(ErrorCode::UnparseableGeneration, req.request_id + ": " + e.what());
    }
    if (got != expected)
      throw Error(ErrorCode::UnparseableGeneration, req.request_id + ": generated types differ from the template");
    resp.request_id = req.request_id;
    return resp;
  });
}

TypeScoreResponse score_types(const TypeScoreRequest& req, GenerationBackend& backend, const RetryPolicy& policy) {
  if (req.slot_count == 0) return TypeScoreResponse{req.request_id, {}, {}};
  return with_retries(policy, [&] {
    auto resp = backend.score_types(req);
    if (resp.names.size() != req.slot_count)
      throw Error(ErrorCode::SlotMismatch, req.request_id + ": expected " + std::to_string(req.slot_count) +
                                               " type names, got " + std::to_string(resp.names.size()));
    for (auto& n : resp.names) n = normalize_name(n);
    resp.request_id = req.request_id;
    return resp;
  });
}

namespace {

template <typename Resp, typename Req, typename Call>
std::vector<Result<Resp>> run_batch(const std::vector<Req>& reqs, std::size_t max_in_flight, Call&& call) {
  if (max_in_flight == 0) throw Error(ErrorCode::ConfigError, "max_in_flight must be >= 1");
  std::vector<std::optional<Result<Resp>>> slots(reqs.size());
  parallel_for(reqs.size(), max_in_flight, [&](std::size_t i) {
    try {
      slots[i].emplace(call(reqs[i]));
    } catch (const Error& e) {
      slots[i].emplace(e);
    } catch (const std::exception& e) {
      slots[i].emplace(Error(ErrorCode::BackendUnavailable, e.what()));
    }
  });
  std::vector<Result<Resp>> out;
  out.reserve(reqs.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace

std::vector<Result<FillResponse>> fill_batch(const std::vector<FillRequest>& reqs, GenerationBackend& backend,
                                             const LabelSchema& schema, std::size_t max_in_flight,
                                             const RetryPolicy& policy) {
  return run_batch<FillResponse>(reqs, max_in_flight,
                                 [&](const FillRequest& r) { return fill(r, backend, schema, policy); });
}

std::vector<Result<TypeScoreResponse>> score_batch(const std::vector<TypeScoreRequest>& reqs,
                                                   GenerationBackend& backend, std::size_t max_in_flight,
                                                   const RetryPolicy& policy) {
  return run_batch<TypeScoreResponse>(reqs, max_in_flight,
                                      [&](const TypeScoreRequest& r) { return score_types(r, backend, policy); });
}

}  // namespace neraug

namespace neraug {

std::vector<std::vector<std::string>> type_query_entities(const TypeScoreRequest& req) {
  // Only groups whose name is the placeholder are asked about.
  std::vector<std::vector<std::string>> out;
  const auto tokens = LinearizedText::from_string(req.text).tokens;
  bool inside = false, naming = false;
  std::vector<std::string> words, name;
  for (const auto& tok : tokens) {
    if (tok == kOpenBracket) {
      if (inside) throw Error(ErrorCode::UnbalancedBrackets, req.request_id + ": nested '['");
      inside = true;
      naming = false;
      words.clear();
      name.clear();
    } else if (tok == kSeparator && inside) {
      naming = true;
    } else if (tok == kCloseBracket) {
      if (!inside || !naming) throw Error(ErrorCode::UnbalancedBrackets, req.request_id + ": stray ']'");
      inside = false;
      if (name.size() == 1 && name[0] == req.placeholder) out.push_back(words);
    } else if (inside) {
      (naming ? name : words).push_back(naming ? tok : unescape_token(tok));
    }
  }
  if (inside) throw Error(ErrorCode::UnbalancedBrackets, req.request_id + ": unterminated group");
  return out;
}

}  // namespace neraug
