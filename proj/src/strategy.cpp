#include "neraug/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neraug/error.hpp"

namespace neraug {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::SA: return "sa";
    case Strategy::ELC: return "elc";
    case Strategy::EA: return "ea";
    case Strategy::ER: return "er";
  }
  return "?";
}

Strategy strategy_from_string(std::string_view name) {
  const auto key = normalize_name(name);
  for (auto s : kAllStrategies)
    if (to_string(s) == key) return s;
  throw Error(ErrorCode::ConfigError, "unknown strategy '" + std::string(name) + "'");
}

void StrategyConfig::validate() const {
  if (entity_aug_choices.empty() || context_aug_choices.empty())
    throw Error(ErrorCode::ConfigError, "M_choices and N_choices must be non-empty");
  const auto min_m = *std::min_element(entity_aug_choices.begin(), entity_aug_choices.end());
  if (flips > min_m)
    throw Error(ErrorCode::InvalidKM, "K=" + std::to_string(flips) + " exceeds the smallest M choice " + std::to_string(min_m));
}

std::vector<OpSpec> compose_strategy(Strategy s, std::size_t flips, std::size_t entity_augs, std::size_t context_augs) {
  if (s == Strategy::SA) flips = 0;
  if (entity_augs < flips)
    throw Error(ErrorCode::InvalidKM, "M=" + std::to_string(entity_augs) + " < K=" + std::to_string(flips));
  std::vector<OpSpec> ops;
  for (std::size_t k = 0; k < flips; ++k) {
    switch (s) {
      case Strategy::ELC: ops.push_back({OpKind::Op2}); break;
      case Strategy::EA: ops.push_back({OpKind::Op3}); break;
      case Strategy::ER:
        ops.push_back({OpKind::Op3});
        ops.push_back({OpKind::Op4, std::nullopt, true});
        break;
      case Strategy::SA: break;
    }
  }
  ops.insert(ops.end(), entity_augs - flips, OpSpec{OpKind::Op1});
  ops.insert(ops.end(), context_augs, OpSpec{OpKind::Op5});
  return ops;
}

StrategyPlan compose_strategy(Strategy s, const StrategyConfig& cfg, Rng& rng) {
  cfg.validate();
  StrategyPlan plan;
  plan.strategy = s;
  plan.flips = s == Strategy::SA ? 0 : cfg.flips;
  plan.entity_augs = cfg.entity_aug_choices[uniform_index(rng, 0, cfg.entity_aug_choices.size() - 1)];
  plan.context_augs = cfg.context_aug_choices[uniform_index(rng, 0, cfg.context_aug_choices.size() - 1)];
  plan.ops = compose_strategy(s, plan.flips, plan.entity_augs, plan.context_augs);
  return plan;
}

std::string_view to_string(FlipKind k) noexcept {
  switch (k) {
    case FlipKind::Random: return "random";
    case FlipKind::Fixed: return "fixed";
    case FlipKind::Probability: return "probability";
  }
  return "?";
}

std::string_view to_string(SimilarityMetric m) noexcept {
  return m == SimilarityMetric::Cosine ? "cosine" : "negative-euclidean";
}

std::string_view to_string(FlipDirection d) noexcept {
  return d == FlipDirection::SimilarHigh ? "similar-high" : "similar-low";
}

FlipKind flip_kind_from_string(std::string_view name) {
  for (auto k : {FlipKind::Random, FlipKind::Fixed, FlipKind::Probability})
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::ConfigError, "unknown flip scheme '" + std::string(name) + "'");
}

SimilarityMetric metric_from_string(std::string_view name) {
  if (name == "cosine") return SimilarityMetric::Cosine;
  if (name == "negative-euclidean" || name == "euclidean") return SimilarityMetric::NegativeEuclidean;
  throw Error(ErrorCode::ConfigError, "unknown flip metric '" + std::string(name) + "'");
}

FlipDirection direction_from_string(std::string_view name) {
  if (name == "similar-high" || name == "high") return FlipDirection::SimilarHigh;
  if (name == "similar-low" || name == "low") return FlipDirection::SimilarLow;
  throw Error(ErrorCode::ConfigError, "unknown flip direction '" + std::string(name) + "'");
}

double type_similarity(TypeId a, TypeId b, const LabelSchema& schema, SimilarityMetric metric) {
  if (!schema.has_embeddings()) throw Error(ErrorCode::MissingEmbeddings, "schema has no type embeddings");
  const auto ea = schema.embedding(a);
  const auto eb = schema.embedding(b);
  return metric == SimilarityMetric::Cosine ? cosine_similarity(ea, eb) : negative_euclidean(ea, eb);
}

namespace {

void check_applicable(const LabelSchema& schema, const FlipScheme& scheme) {
  if (schema.size() < 2) throw Error(ErrorCode::SingletonSchema, "label flipping needs at least two types");
  if (scheme.kind != FlipKind::Random && !schema.has_embeddings())
    throw Error(ErrorCode::MissingEmbeddings, std::string(to_string(scheme.kind)) + " scheme needs type embeddings");
  if (scheme.temperature <= 0.0) throw Error(ErrorCode::ConfigError, "softmax temperature must be positive");
}

}  // namespace

Eigen::VectorXd flip_distribution(TypeId current, const LabelSchema& schema, const FlipScheme& scheme) {
  check_applicable(schema, scheme);
  const auto n = static_cast<Eigen::Index>(schema.size());
  const auto cur = static_cast<Eigen::Index>(current.value);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  if (scheme.kind == FlipKind::Random) {
    p.setConstant(1.0 / static_cast<double>(n - 1));
    p(cur) = 0.0;
    return p;
  }
  const double sign = scheme.direction == FlipDirection::SimilarHigh ? 1.0 : -1.0;
  Eigen::VectorXd score(n);
  for (Eigen::Index i = 0; i < n; ++i)
    score(i) = i == cur ? -std::numeric_limits<double>::infinity()
                        : sign * type_similarity(current, TypeId{static_cast<std::size_t>(i)}, schema, scheme.metric);
  if (scheme.kind == FlipKind::Fixed) {
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != cur && (best < 0 || score(i) > score(best))) best = i;
    p(best) = 1.0;
    return p;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != cur) top = std::max(top, score(i));
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != cur) p(i) = std::exp((score(i) - top) / scheme.temperature);
  return p / p.sum();
}

TypeId choose_flip_type(TypeId current, const LabelSchema& schema, const FlipScheme& scheme, Rng& rng) {
  const auto p = flip_distribution(current, schema, scheme);
  if (scheme.kind == FlipKind::Random) {
    auto pick = uniform_index(rng, 0, schema.size() - 2);
    if (pick >= current.value) ++pick;
    return TypeId{pick};
  }
  if (scheme.kind == FlipKind::Fixed) {
    Eigen::Index best;
    p.maxCoeff(&best);
    return TypeId{static_cast<std::size_t>(best)};
  }
  const double u = uniform_unit(rng);
  double acc = 0.0;
  Eigen::Index last = -1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    last = i;
    acc += p(i);
    if (u < acc) return TypeId{static_cast<std::size_t>(i)};
  }
  return TypeId{static_cast<std::size_t>(last)};
}

FlipPicker make_flip_picker(const LabelSchema& schema, const FlipScheme& scheme) {
  check_applicable(schema, scheme);
  return [schema, scheme](TypeId current, Rng& rng) { return choose_flip_type(current, schema, scheme, rng); };
}

}  // namespace neraug
