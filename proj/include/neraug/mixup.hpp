#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/error.hpp"
#include "neraug/rng.hpp"
#include "neraug/sample.hpp"

namespace neraug {

struct MixupConfig {
  double alpha = 130.0;
  double beta = 5.0;
  std::vector<int> layers{8, 9, 10};

  void validate() const;
};

/// Beta(alpha, beta) as a ratio of gamma variates. Exact, no approximation.
double sample_lambda(const MixupConfig& cfg, Rng& rng);

/// How sequences of different length are brought to a common length.
enum class AlignMode { Pad, Truncate };

std::string_view to_string(AlignMode m) noexcept;
AlignMode align_mode_from_string(std::string_view name);

/// Row r of a sequence matrix is position r. Pad appends zero rows.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> align_states(
    const Eigen::MatrixBase<Derived>& h, Eigen::Index length) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out = Mat::Zero(length, h.cols());
  const auto keep = std::min(length, h.rows());
  out.topRows(keep) = h.topRows(keep);
  return out;
}

/// Like align_states, but padded rows are one-hot on `outside`.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> align_labels(
    const Eigen::MatrixBase<Derived>& y, Eigen::Index length, Eigen::Index outside) {
  if (outside < 0 || outside >= y.cols()) throw Error(ErrorCode::DimensionMismatch, "outside label out of range");
  auto out = align_states(y, length);
  for (auto r = y.rows(); r < length; ++r) out(r, outside) = 1;
  return out;
}

inline Eigen::Index common_length(Eigen::Index a, Eigen::Index b, AlignMode mode) {
  return mode == AlignMode::Pad ? std::max(a, b) : std::min(a, b);
}

/// lambda * h_f + (1 - lambda) * h_o, after aligning lengths.
template <class DerivedF, class DerivedO>
Eigen::Matrix<typename DerivedF::Scalar, Eigen::Dynamic, Eigen::Dynamic> interpolate_states(
    const Eigen::MatrixBase<DerivedF>& h_f, const Eigen::MatrixBase<DerivedO>& h_o, typename DerivedF::Scalar lambda,
    AlignMode mode = AlignMode::Pad) {
  if (h_f.cols() != h_o.cols())
    throw Error(ErrorCode::DimensionMismatch, "hidden sizes differ: " + std::to_string(h_f.cols()) + " vs " +
                                                  std::to_string(h_o.cols()));
  const auto n = common_length(h_f.rows(), h_o.rows(), mode);
  return lambda * align_states(h_f, n) + (1 - lambda) * align_states(h_o, n);
}

template <class DerivedF, class DerivedO>
Eigen::Matrix<typename DerivedF::Scalar, Eigen::Dynamic, Eigen::Dynamic> mix_labels(
    const Eigen::MatrixBase<DerivedF>& y_f, const Eigen::MatrixBase<DerivedO>& y_o, typename DerivedF::Scalar lambda,
    Eigen::Index outside = 0, AlignMode mode = AlignMode::Pad) {
  if (y_f.cols() != y_o.cols())
    throw Error(ErrorCode::DimensionMismatch, "tag sets differ: " + std::to_string(y_f.cols()) + " vs " +
                                                  std::to_string(y_o.cols()));
  const auto n = common_length(y_f.rows(), y_o.rows(), mode);
  return lambda * align_labels(y_f, n, outside) + (1 - lambda) * align_labels(y_o, n, outside);
}

/// True if every row is non-negative and sums to 1 within `tol`.
template <class Derived>
bool is_distribution_sequence(const Eigen::MatrixBase<Derived>& y, double tol = 1e-9) {
  if ((y.array() < 0).any()) return false;
  return ((y.rowwise().sum().array() - 1).abs() <= tol).all();
}

/// Tag columns: 0 is O, then B-t and I-t for each type t in schema order.
inline Eigen::Index bio_tag_count(const LabelSchema& schema) { return 1 + 2 * static_cast<Eigen::Index>(schema.size()); }
inline Eigen::Index bio_column(TypeId type, bool begin) { return 1 + 2 * static_cast<Eigen::Index>(type.value) + (begin ? 0 : 1); }

Eigen::MatrixXd one_hot_labels(const TaggedSentence& s, const LabelSchema& schema);

struct MixupPair {
  std::string flipped_id;
  std::string original_id;
  double lambda = 0;
  int layer = 0;

  bool operator==(const MixupPair&) const = default;
};

/// Pairs every label-flipping sample with its parent. Label-preserving
/// samples are never paired. Each pair draws from its own stream.
std::vector<MixupPair> build_pairs(const std::vector<AugmentedSample>& augmented, const Dataset& originals,
                                   const MixupConfig& cfg, std::uint64_t seed);

void write_pairs(std::ostream& out, const std::vector<MixupPair>& pairs);
std::vector<MixupPair> read_pairs(std::istream& in);

}  // namespace neraug
