#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "neraug/corpus.hpp"

namespace neraug {

struct SpanScore {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

/// Span-level exact match on (start, end, type), micro-averaged. Both sides
/// must hold the same sentence ids. Undefined ratios are reported as 0.
SpanScore micro_f1(const std::vector<TaggedSentence>& gold, const std::vector<TaggedSentence>& pred);
inline SpanScore micro_f1(const Dataset& gold, const Dataset& pred) { return micro_f1(gold.sentences, pred.sentences); }

enum class ConfidencePolicy { Min, Mean };

std::string_view to_string(ConfidencePolicy p) noexcept;
ConfidencePolicy confidence_policy_from_string(std::string_view name);

/// Rows are tokens, columns are tag probabilities. Reduces the per-token
/// maximum with the policy. An empty sentence is fully confident.
template <class Derived>
double sentence_confidence(const Eigen::MatrixBase<Derived>& token_probs, ConfidencePolicy policy) {
  if (token_probs.rows() == 0) return 1.0;
  const auto best = token_probs.rowwise().maxCoeff();
  return static_cast<double>(policy == ConfidencePolicy::Min ? best.minCoeff() : best.mean());
}

/// A model prediction with its sentence-level confidence.
struct ConfidenceAnnotation {
  TaggedSentence sentence;
  double confidence = 0;
};

/// Keeps annotations whose confidence is at least tau, in input order.
std::vector<ConfidenceAnnotation> high_conf_select(const std::vector<ConfidenceAnnotation>& annotations, double tau);

}  // namespace neraug
