#include "neraug/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "neraug/error.hpp"

namespace neraug {

namespace {

using SpanKey = std::tuple<std::size_t, std::size_t, std::size_t>;

std::set<SpanKey> span_set(const TaggedSentence& s) {
  std::set<SpanKey> out;
  for (const auto& sp : s.spans) out.emplace(sp.start, sp.end, sp.type.value);
  return out;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

SpanScore micro_f1(const std::vector<TaggedSentence>& gold, const std::vector<TaggedSentence>& pred) {
  std::map<std::string, const TaggedSentence*> by_id;
  for (const auto& p : pred) {
    if (!by_id.emplace(p.id, &p).second) throw Error(ErrorCode::IdMismatch, "duplicate prediction id '" + p.id + "'");
  }
  if (by_id.size() != gold.size())
    throw Error(ErrorCode::IdMismatch, std::to_string(gold.size()) + " gold sentences but " +
                                           std::to_string(by_id.size()) + " predictions");
  SpanScore score;
  for (const auto& g : gold) {
    const auto it = by_id.find(g.id);
    if (it == by_id.end()) throw Error(ErrorCode::IdMismatch, "no prediction for '" + g.id + "'");
    const auto gs = span_set(g);
    const auto ps = span_set(*it->second);
    std::size_t common = 0;
    for (const auto& k : ps) common += gs.contains(k) ? 1 : 0;
    score.tp += common;
    score.fp += ps.size() - common;
    score.fn += gs.size() - common;
  }
  score.precision = ratio(score.tp, score.tp + score.fp);
  score.recall = ratio(score.tp, score.tp + score.fn);
  score.f1 = score.precision + score.recall == 0
                 ? 0.0
                 : 2 * score.precision * score.recall / (score.precision + score.recall);
  return score;
}

std::string_view to_string(ConfidencePolicy p) noexcept { return p == ConfidencePolicy::Min ? "min" : "mean"; }

ConfidencePolicy confidence_policy_from_string(std::string_view name) {
  if (name == "min") return ConfidencePolicy::Min;
  if (name == "mean") return ConfidencePolicy::Mean;
  throw Error(ErrorCode::ConfigError, "unknown confidence policy '" + std::string(name) + "'");
}

std::vector<ConfidenceAnnotation> high_conf_select(const std::vector<ConfidenceAnnotation>& annotations, double tau) {
  std::vector<ConfidenceAnnotation> out;
  std::copy_if(annotations.begin(), annotations.end(), std::back_inserter(out),
               [tau](const ConfidenceAnnotation& a) { return a.confidence >= tau; });
  return out;
}

}  // namespace neraug
