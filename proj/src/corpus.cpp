#include "neraug/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "neraug/error.hpp"
#include "neraug/rng.hpp"

namespace neraug {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string field;
  while (in >> field) out.push_back(field);
  return out;
}

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::string normalize_name(std::string_view name) {
  std::string out(trim(name));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

LabelSchema::LabelSchema(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (auto& e : entries_) e.display_name = normalize_name(e.display_name);
  validate();
}

LabelSchema LabelSchema::with_embeddings(std::vector<Entry> entries, Eigen::MatrixXd embeddings) {
  LabelSchema out;
  out.entries_ = std::move(entries);
  out.embeddings_ = std::move(embeddings);
  for (auto& e : out.entries_) e.display_name = normalize_name(e.display_name);
  out.validate();
  return out;
}

void LabelSchema::validate() const {
  std::set<std::string> tags, names;
  for (const auto& e : entries_) {
    if (e.tag.empty() || has_space(e.tag))
      throw Error(ErrorCode::InvalidSchema, "tag must be a non-empty word: '" + e.tag + "'");
    if (e.display_name.empty())
      throw Error(ErrorCode::InvalidSchema, "empty display name for tag " + e.tag);
    if (e.display_name.find_first_of("[]|\\") != std::string::npos)
      throw Error(ErrorCode::InvalidSchema, "display name uses a reserved symbol: " + e.display_name);
    if (!tags.insert(normalize_name(e.tag)).second)
      throw Error(ErrorCode::InvalidSchema, "duplicate tag " + e.tag);
    if (!names.insert(e.display_name).second)
      throw Error(ErrorCode::InvalidSchema, "duplicate display name " + e.display_name);
  }
  if (embeddings_.size() > 0) {
    if (static_cast<std::size_t>(embeddings_.rows()) != entries_.size())
      throw Error(ErrorCode::InvalidSchema, "embedding count does not match type count");
    if (embeddings_.cols() < 1) throw Error(ErrorCode::InvalidSchema, "embedding dimension must be >= 1");
  }
}

LabelSchema LabelSchema::parse(std::istream& in) {
  std::vector<Entry> entries;
  std::vector<std::vector<double>> vectors;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    std::vector<std::string> fields;
    std::string_view rest = line;
    while (true) {
      auto tab = rest.find('\t');
      fields.emplace_back(trim(rest.substr(0, tab)));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() < 2 || fields.size() > 3)
      throw Error(ErrorCode::InvalidSchema, "line " + std::to_string(lineno) + ": expected 2 or 3 tab-separated fields");
    entries.push_back({fields[0], fields[1]});
    if (fields.size() == 3) {
      std::vector<double> v;
      std::stringstream ss(fields[2]);
      std::string num;
      while (std::getline(ss, num, ',')) {
        try {
          v.push_back(std::stod(num));
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidSchema, "line " + std::to_string(lineno) + ": bad embedding value '" + num + "'");
        }
      }
      vectors.push_back(std::move(v));
    }
  }
  if (vectors.empty()) return LabelSchema(std::move(entries));
  if (vectors.size() != entries.size())
    throw Error(ErrorCode::InvalidSchema, "embeddings must be given for every type or none");
  const auto dim = vectors.front().size();
  Eigen::MatrixXd emb(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    if (vectors[r].size() != dim)
      throw Error(ErrorCode::InvalidSchema, "embedding dimensions differ");
    for (std::size_t c = 0; c < dim; ++c) emb(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vectors[r][c];
  }
  return with_embeddings(std::move(entries), std::move(emb));
}

LabelSchema LabelSchema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open schema file " + path);
  return parse(in);
}

void LabelSchema::write(std::ostream& out) const {
  out.precision(17);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out << entries_[i].tag << '\t' << entries_[i].display_name;
    if (has_embeddings()) {
      out << '\t';
      for (Eigen::Index c = 0; c < embeddings_.cols(); ++c) {
        if (c) out << ',';
        out << embeddings_(static_cast<Eigen::Index>(i), c);
      }
    }
    out << '\n';
  }
}

std::optional<TypeId> LabelSchema::find_tag(std::string_view tag) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].tag == tag) return TypeId{i};
  return std::nullopt;
}

std::optional<TypeId> LabelSchema::find_display_name(std::string_view name) const {
  const auto key = normalize_name(name);
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].display_name == key) return TypeId{i};
  return std::nullopt;
}

bool operator==(const LabelSchema& a, const LabelSchema& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i)
    if (a.entries_[i].tag != b.entries_[i].tag || a.entries_[i].display_name != b.entries_[i].display_name)
      return false;
  if (a.embeddings_.rows() != b.embeddings_.rows() || a.embeddings_.cols() != b.embeddings_.cols()) return false;
  return a.embeddings_ == b.embeddings_;
}

std::vector<TypeId> TaggedSentence::type_sequence() const {
  std::vector<TypeId> out;
  out.reserve(spans.size());
  for (const auto& sp : spans) out.push_back(sp.type);
  return out;
}

void validate_sentence(const TaggedSentence& s, const LabelSchema& schema) {
  for (const auto& t : s.tokens)
    if (t.empty() || has_space(t))
      throw Error(ErrorCode::MalformedLine, "sentence " + s.id + ": tokens must be non-empty and whitespace-free");
  std::size_t prev_end = 0;
  for (const auto& sp : s.spans) {
    if (sp.start >= sp.end || sp.end > s.tokens.size() || sp.start < prev_end)
      throw Error(ErrorCode::InvalidBioTransition, "sentence " + s.id + ": spans must be sorted, non-empty and non-overlapping");
    if (sp.type.value >= schema.size())
      throw Error(ErrorCode::UnknownType, "sentence " + s.id + ": span type outside schema");
    prev_end = sp.end;
  }
}

namespace {

struct SentenceBuilder {
  const LabelSchema& schema;
  ParseMode mode;
  TaggedSentence current;
  std::optional<EntitySpan> open;
  std::size_t lineno = 0;

  void close_open() {
    if (open) {
      open->end = current.tokens.size();
      current.spans.push_back(*open);
      open.reset();
    }
  }

  void add(const std::string& token, const std::string& tag) {
    if (tag == "O") {
      close_open();
      current.tokens.push_back(token);
      return;
    }
    if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I'))
      throw Error(ErrorCode::UnknownTag, "line " + std::to_string(lineno) + ": '" + tag + "' is not a BIO2 tag");
    const auto type = schema.find_tag(tag.substr(2));
    if (!type) throw Error(ErrorCode::UnknownTag, "line " + std::to_string(lineno) + ": type of '" + tag + "' not in schema");
    const bool continues = tag[0] == 'I' && open && open->type == *type;
    if (tag[0] == 'I' && !continues && mode == ParseMode::Strict)
      throw Error(ErrorCode::InvalidBioTransition,
                  "line " + std::to_string(lineno) + ": '" + tag + "' does not continue an entity of the same type");
    if (!continues) {
      close_open();
      open = EntitySpan{current.tokens.size(), 0, *type};
    }
    current.tokens.push_back(token);
  }

  TaggedSentence finish() {
    close_open();
    TaggedSentence out = std::move(current);
    current = {};
    return out;
  }
};

}  // namespace

Dataset parse_conll(std::istream& in, const LabelSchema& schema, ParseMode mode, std::string_view id_prefix) {
  Dataset d{schema, {}, true};
  SentenceBuilder b{schema, mode, {}, std::nullopt, 0};
  std::optional<std::string> pending_id;
  auto flush = [&] {
    if (b.current.tokens.empty()) return;
    auto s = b.finish();
    s.id = pending_id ? *pending_id : std::string(id_prefix) + std::to_string(d.sentences.size());
    pending_id.reset();
    d.sentences.push_back(std::move(s));
  };
  std::string line;
  while (std::getline(in, line)) {
    ++b.lineno;
    const auto t = trim(line);
    if (t.empty()) {
      flush();
      continue;
    }
    if (t.rfind("-DOCSTART-", 0) == 0) continue;
    if (t.rfind("# id = ", 0) == 0 && b.current.tokens.empty()) {
      pending_id = std::string(trim(t.substr(7)));
      continue;
    }
    auto fields = split_ws(t);
    if (fields.size() < 2)
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(b.lineno) + ": expected token and tag");
    b.add(fields.front(), fields.back());
  }
  flush();
  return d;
}

Dataset parse_conll(std::string_view text, const LabelSchema& schema, ParseMode mode, std::string_view id_prefix) {
  std::istringstream in{std::string(text)};
  return parse_conll(in, schema, mode, id_prefix);
}

Dataset load_conll(const std::string& path, const LabelSchema& schema, ParseMode mode, std::string_view id_prefix) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus file " + path);
  return parse_conll(in, schema, mode, id_prefix);
}

std::vector<std::string> bio_tags(const TaggedSentence& s, const LabelSchema& schema) {
  std::vector<std::string> tags(s.tokens.size(), "O");
  for (const auto& sp : s.spans)
    for (std::size_t i = sp.start; i < sp.end; ++i)
      tags[i] = (i == sp.start ? "B-" : "I-") + schema.tag(sp.type);
  return tags;
}

void emit_conll(const Dataset& d, std::ostream& out) {
  bool first = true;
  for (const auto& s : d.sentences) {
    if (!first) out << '\n';
    first = false;
    out << "# id = " << s.id << '\n';
    const auto tags = bio_tags(s, d.schema);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) out << s.tokens[i] << ' ' << tags[i] << '\n';
  }
}

std::string emit_conll(const Dataset& d) {
  std::ostringstream out;
  emit_conll(d, out);
  return out.str();
}

ShotSplit sample_shots(const Dataset& d, std::size_t shots, std::uint64_t seed) {
  if (shots == 0) throw Error(ErrorCode::ConfigError, "shot count K must be >= 1");
  const auto n = d.sentences.size();
  const auto types = d.schema.size();

  std::vector<std::vector<bool>> contains(n, std::vector<bool>(types, false));
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& sp : d.sentences[i].spans) contains[i][sp.type.value] = true;

  std::vector<bool> selected(n, false);
  std::vector<std::size_t> coverage(types, 0);
  ShotSplit split;
  for (std::size_t t = 0; t < types; ++t) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i)
      if (contains[i][t]) candidates.push_back(i);
    Rng rng = derive_stream(seed, "shots", t);
    for (std::size_t i = candidates.size(); i > 1; --i) std::swap(candidates[i - 1], candidates[uniform_index(rng, 0, i - 1)]);
    for (std::size_t idx : candidates) {
      if (coverage[t] >= shots) break;
      if (selected[idx]) continue;
      selected[idx] = true;
      for (std::size_t u = 0; u < types; ++u)
        if (contains[idx][u]) ++coverage[u];
    }
    if (coverage[t] < shots)
      split.warnings.push_back("InsufficientSentences: type " + d.schema.tag(TypeId{t}) + " has " +
                               std::to_string(coverage[t]) + " of " + std::to_string(shots) + " shots");
  }

  split.train = Dataset{d.schema, {}, true};
  split.unlabeled = Dataset{d.schema, {}, false};
  for (std::size_t i = 0; i < n; ++i) {
    if (selected[i]) split.train.sentences.push_back(d.sentences[i]);
    else split.unlabeled.sentences.push_back(d.sentences[i]);
  }
  return split;
}

}  // namespace neraug
