#include "neraug/augment.hpp"

#include <numeric>

#include "neraug/linearizer.hpp"
#include "neraug/parallel.hpp"

namespace neraug {

std::size_t AugmentCounts::skipped_total() const {
  return std::accumulate(skipped.begin(), skipped.end(), std::size_t{0},
                         [](std::size_t acc, const auto& kv) { return acc + kv.second; });
}

std::size_t AugmentCounts::fill_failed_total() const {
  return std::accumulate(fill_failed.begin(), fill_failed.end(), std::size_t{0},
                         [](std::size_t acc, const auto& kv) { return acc + kv.second; });
}

AugmentCounts AugmentReport::total() const {
  AugmentCounts t;
  for (const auto& [s, c] : per_strategy) {
    t.planned += c.planned;
    t.generated += c.generated;
    t.op_skips += c.op_skips;
    for (const auto& [k, v] : c.skipped) t.skipped[k] += v;
    for (const auto& [k, v] : c.fill_failed) t.fill_failed[k] += v;
  }
  return t;
}

namespace {

Json counts_json(const AugmentCounts& c) {
  return Json{{"planned", c.planned},     {"generated", c.generated},     {"skipped", c.skipped},
              {"fill_failed", c.fill_failed}, {"op_skips", c.op_skips}, {"reconciles", c.reconciles()}};
}

struct Planned {
  std::string id;
  std::string parent_id;
  Strategy strategy;
  MaskedTemplate tmpl;
};

std::vector<Planned> plan(const Dataset& d, const AugmentConfig& cfg, AugmentReport& report) {
  cfg.ops.validate();
  cfg.strategy.validate();
  if (cfg.multiplier == 0) throw Error(ErrorCode::ConfigError, "multiplier must be >= 1");
  const bool flips = std::any_of(cfg.strategies.begin(), cfg.strategies.end(), is_label_flipping);
  const FlipPicker picker = flips ? make_flip_picker(d.schema, cfg.flip) : FlipPicker{};

  report.sentences = d.sentences.size();
  report.multiplier = cfg.multiplier;
  for (auto s : cfg.strategies) report.per_strategy[s];

  // Per-(sentence, strategy) work is independent; plan in parallel, merge in order.
  struct Slot {
    std::vector<std::optional<Planned>> samples;
    std::vector<AugmentCounts> counts;
  };
  std::vector<Slot> slots(d.sentences.size());
  parallel_for(d.sentences.size(), cfg.max_in_flight, [&](std::size_t i) {
    const auto& sentence = d.sentences[i];
    const auto seg = segment(sentence);
    auto& slot = slots[i];
    for (auto strategy : cfg.strategies) {
      AugmentCounts counts;
      for (std::size_t copy = 0; copy < cfg.multiplier; ++copy) {
        ++counts.planned;
        const auto id = sentence.id + "#" + std::string(to_string(strategy)) + "-" + std::to_string(copy);
        Rng rng = derive_stream(cfg.seed, sentence.id + "/" + std::string(to_string(strategy)), copy);
        const auto strategy_plan = compose_strategy(strategy, cfg.strategy, rng);
        MaskedTemplate t(seg);
        std::optional<std::size_t> anchor;
        std::optional<std::string> skip;
        for (const auto& op : strategy_plan.ops) {
          try {
            anchor = t.apply(op, cfg.ops, rng, picker, anchor);
          } catch (const Error& e) {
            const bool recoverable = e.code() == ErrorCode::NoEntity || e.code() == ErrorCode::NoContext ||
                                     e.code() == ErrorCode::OverlapExhausted;
            if (!recoverable || is_flip_op(op.kind)) {
              skip = std::string(to_string(e.code()));
              break;
            }
            ++counts.op_skips;
          }
        }
        if (!skip && t.slot_count() == 0) skip = "NoSlots";
        if (skip) {
          ++counts.skipped[*skip];
          slot.samples.emplace_back(std::nullopt);
          continue;
        }
        slot.samples.emplace_back(Planned{id, sentence.id, strategy, std::move(t)});
      }
      slot.counts.push_back(std::move(counts));
    }
  });

  std::vector<Planned> out;
  for (auto& slot : slots) {
    for (std::size_t k = 0; k < cfg.strategies.size(); ++k) {
      auto& into = report.per_strategy[cfg.strategies[k]];
      const auto& c = slot.counts[k];
      into.planned += c.planned;
      into.op_skips += c.op_skips;
      for (const auto& [r, n] : c.skipped) into.skipped[r] += n;
    }
    for (auto& p : slot.samples)
      if (p) out.push_back(std::move(*p));
  }
  return out;
}

}  // namespace

Json AugmentReport::to_json() const {
  Json per = Json::object();
  for (const auto& [s, c] : per_strategy) per[std::string(neraug::to_string(s))] = counts_json(c);
  const auto t = total();
  const auto expected = sentences * per_strategy.size() * multiplier;
  Json identity{{"sentences", sentences},
                {"strategies", per_strategy.size()},
                {"multiplier", multiplier},
                {"expected_planned", expected},
                {"planned", t.planned},
                {"precondition_skips", t.skipped_total()},
                {"fill_failed", t.fill_failed_total()},
                {"generated", t.generated},
                {"holds", expected == t.planned && t.reconciles()}};
  return Json{{"sentences", sentences},
              {"multiplier", multiplier},
              {"per_strategy", per},
              {"total", counts_json(t)},
              {"counting_identity", identity}};
}

std::vector<std::pair<std::string, MaskedTemplate>> plan_templates(const Dataset& d, const AugmentConfig& cfg,
                                                                   AugmentReport* report) {
  AugmentReport local;
  auto planned = plan(d, cfg, report ? *report : local);
  std::vector<std::pair<std::string, MaskedTemplate>> out;
  out.reserve(planned.size());
  for (auto& p : planned) out.emplace_back(std::move(p.id), std::move(p.tmpl));
  return out;
}

AugmentResult augment(const Dataset& d, const AugmentConfig& cfg, GenerationBackend& backend) {
  AugmentResult result;
  auto planned = plan(d, cfg, result.report);

  std::vector<FillRequest> requests;
  requests.reserve(planned.size());
  for (const auto& p : planned) {
    DecodeOptions decode = cfg.decode;
    decode.seed = splitmix64(cfg.seed ^ fnv1a(p.id));
    requests.push_back(make_fill_request(p.tmpl, d.schema, p.id, decode));
  }
  auto responses = fill_batch(requests, backend, d.schema, cfg.max_in_flight, cfg.retry);

  for (std::size_t i = 0; i < planned.size(); ++i) {
    auto& p = planned[i];
    auto& counts = result.report.per_strategy[p.strategy];
    if (!responses[i]) {
      ++counts.fill_failed[std::string(to_string(responses[i].error().code()))];
      continue;
    }
    AugmentedSample s;
    s.id = p.id;
    s.parent_id = p.parent_id;
    s.strategy = p.strategy;
    s.ops = p.tmpl.provenance();
    s.flipped_positions = p.tmpl.flipped_positions();
    s.sentence = delinearize(responses[i].value().filled_text, d.schema, p.id);
    ++counts.generated;
    result.samples.push_back(std::move(s));
  }
  return result;
}

}  // namespace neraug
