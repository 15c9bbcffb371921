#pragma once

#include <Eigen/Core>

#include <string_view>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/mask_ops.hpp"
#include "neraug/rng.hpp"

namespace neraug {

/// SA preserves labels; ELC, EA and ER flip them.
enum class Strategy { SA, ELC, EA, ER };

inline constexpr Strategy kAllStrategies[] = {Strategy::SA, Strategy::ELC, Strategy::EA, Strategy::ER};

std::string_view to_string(Strategy s) noexcept;
Strategy strategy_from_string(std::string_view name);
constexpr bool is_label_flipping(Strategy s) noexcept { return s != Strategy::SA; }

struct StrategyConfig {
  /// Label-flipping operations per sentence.
  std::size_t flips = 1;
  std::vector<std::size_t> entity_aug_choices{1, 2, 3};
  std::vector<std::size_t> context_aug_choices{1, 2, 3};

  void validate() const;
};

struct StrategyPlan {
  Strategy strategy = Strategy::SA;
  std::size_t flips = 0;
  std::size_t entity_augs = 0;
  std::size_t context_augs = 0;
  std::vector<OpSpec> ops;
};

/// Op list for explicit (K, M, N). SA ignores K.
///   SA:  Op1*M + Op5*N
///   ELC: Op2*K + Op1*(M-K) + Op5*N
///   EA:  Op3*K + Op1*(M-K) + Op5*N
///   ER:  (Op3 + Op4)*K + Op1*(M-K) + Op5*N
std::vector<OpSpec> compose_strategy(Strategy s, std::size_t flips, std::size_t entity_augs, std::size_t context_augs);

/// Draws M and N uniformly from their choice sets, then composes.
StrategyPlan compose_strategy(Strategy s, const StrategyConfig& cfg, Rng& rng);

enum class FlipKind { Random, Fixed, Probability };
enum class SimilarityMetric { Cosine, NegativeEuclidean };
enum class FlipDirection { SimilarHigh, SimilarLow };

std::string_view to_string(FlipKind k) noexcept;
std::string_view to_string(SimilarityMetric m) noexcept;
std::string_view to_string(FlipDirection d) noexcept;
FlipKind flip_kind_from_string(std::string_view name);
SimilarityMetric metric_from_string(std::string_view name);
FlipDirection direction_from_string(std::string_view name);

struct FlipScheme {
  FlipKind kind = FlipKind::Random;
  SimilarityMetric metric = SimilarityMetric::Cosine;
  FlipDirection direction = FlipDirection::SimilarHigh;
  double temperature = 1.0;
};

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar denom = a.norm() * b.norm();
  if (denom == Scalar(0)) return Scalar(0);
  return std::clamp(a.dot(b) / denom, Scalar(-1), Scalar(1));
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar negative_euclidean(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return -(a - b).norm();
}

double type_similarity(TypeId a, TypeId b, const LabelSchema& schema, SimilarityMetric metric);

/// Probability of each type being chosen to replace `current` (zero at
/// `current`). Fixed puts all mass on one type.
Eigen::VectorXd flip_distribution(TypeId current, const LabelSchema& schema, const FlipScheme& scheme);

TypeId choose_flip_type(TypeId current, const LabelSchema& schema, const FlipScheme& scheme, Rng& rng);

/// Validates the scheme against the schema once and binds both.
FlipPicker make_flip_picker(const LabelSchema& schema, const FlipScheme& scheme);

}  // namespace neraug
