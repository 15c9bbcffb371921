#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace neraug {

/// Index of an entity type within its LabelSchema.
struct TypeId {
  std::size_t value = 0;
  friend auto operator<=>(const TypeId&, const TypeId&) = default;
};

std::string normalize_name(std::string_view name);

/// Entity types with short tags ("PER") and natural-language names
/// ("person"). Names are stored lowercase. Optional embeddings are kept
/// row-per-type in a dense matrix.
class LabelSchema {
 public:
  struct Entry {
    std::string tag;
    std::string display_name;
  };

  LabelSchema() = default;
  explicit LabelSchema(std::vector<Entry> entries);
  /// Row i of `embeddings` belongs to entry i.
  static LabelSchema with_embeddings(std::vector<Entry> entries, Eigen::MatrixXd embeddings);

  /// One line per type: tag<TAB>display_name[<TAB>v1,v2,...].
  static LabelSchema parse(std::istream& in);
  static LabelSchema load(const std::string& path);
  void write(std::ostream& out) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const std::string& tag(TypeId id) const { return entries_.at(id.value).tag; }
  const std::string& display_name(TypeId id) const { return entries_.at(id.value).display_name; }

  std::optional<TypeId> find_tag(std::string_view tag) const;
  /// Case-insensitive after trim.
  std::optional<TypeId> find_display_name(std::string_view name) const;

  bool has_embeddings() const noexcept { return embeddings_.rows() > 0; }
  const Eigen::MatrixXd& embeddings() const noexcept { return embeddings_; }
  Eigen::Ref<const Eigen::RowVectorXd> embedding(TypeId id) const { return embeddings_.row(id.value); }

  friend bool operator==(const LabelSchema& a, const LabelSchema& b);

 private:
  void validate() const;

  std::vector<Entry> entries_;
  Eigen::MatrixXd embeddings_;
};

/// Half-open token range [start, end) carrying one entity type.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  TypeId type;
  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct TaggedSentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<EntitySpan> spans;

  std::size_t size() const noexcept { return tokens.size(); }
  std::vector<TypeId> type_sequence() const;
  friend bool operator==(const TaggedSentence&, const TaggedSentence&) = default;
};

/// Throws Error if spans are unsorted, overlapping, out of range, or tokens
/// are empty or contain whitespace.
void validate_sentence(const TaggedSentence& s, const LabelSchema& schema);

struct Dataset {
  LabelSchema schema;
  std::vector<TaggedSentence> sentences;
  /// Unlabeled pools keep their spans for oracle scoring only.
  bool labeled = true;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class ParseMode { Strict, Lenient };

/// CoNLL column format, BIO2 tags in the last column. Sentence ids are
/// assigned as "<prefix><ordinal>" unless a "# id = ..." comment precedes the
/// sentence.
Dataset parse_conll(std::istream& in, const LabelSchema& schema, ParseMode mode = ParseMode::Strict,
                    std::string_view id_prefix = "s");
Dataset parse_conll(std::string_view text, const LabelSchema& schema,
                    ParseMode mode = ParseMode::Strict, std::string_view id_prefix = "s");
Dataset load_conll(const std::string& path, const LabelSchema& schema,
                   ParseMode mode = ParseMode::Strict, std::string_view id_prefix = "s");

void emit_conll(const Dataset& d, std::ostream& out);
std::string emit_conll(const Dataset& d);

/// BIO2 tags for one sentence.
std::vector<std::string> bio_tags(const TaggedSentence& s, const LabelSchema& schema);

struct ShotSplit {
  Dataset train;
  Dataset unlabeled;
  /// One line per type that had fewer than K candidate sentences.
  std::vector<std::string> warnings;
};

/// Few-shot selection: for each type in schema order, shuffle the sentences
/// containing it and take the first ones not yet selected until the type is
/// covered by K selected sentences. A selected sentence counts toward every
/// type it contains.
ShotSplit sample_shots(const Dataset& d, std::size_t shots, std::uint64_t seed);

}  // namespace neraug
