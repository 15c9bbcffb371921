#include "neraug/filter.hpp"

#include <iomanip>
#include <sstream>

#include "neraug/linearizer.hpp"

namespace neraug {

FilterCounts& FilterCounts::operator+=(const FilterCounts& o) {
  input += o.input;
  kept += o.kept;
  dropped_mismatch += o.dropped_mismatch;
  dropped_unparseable += o.dropped_unparseable;
  unavailable += o.unavailable;
  return *this;
}

FilterCounts FilterReport::total() const {
  FilterCounts t;
  for (const auto& [s, c] : per_strategy) t += c;
  return t;
}

void FilterReport::merge(const FilterReport& other) {
  for (const auto& [s, c] : other.per_strategy) per_strategy[s] += c;
}

namespace {

Json counts_json(const FilterCounts& c) {
  return Json{{"input", c.input},
              {"kept", c.kept},
              {"dropped_mismatch", c.dropped_mismatch},
              {"dropped_unparseable", c.dropped_unparseable},
              {"backend_unavailable", c.unavailable},
              {"retention", c.retention()}};
}

}  // namespace

Json FilterReport::to_json() const {
  Json per = Json::object();
  for (const auto& [s, c] : per_strategy) per[std::string(neraug::to_string(s))] = counts_json(c);
  return Json{{"per_strategy", per}, {"total", counts_json(total())}};
}

std::string FilterReport::table() const {
  std::ostringstream out;
  auto row = [&](std::string_view name, const FilterCounts& c) {
    out << std::left << std::setw(9) << name << std::right << std::setw(8) << c.input << std::setw(8) << c.kept
        << std::setw(10) << c.dropped_mismatch << std::setw(13) << c.dropped_unparseable << std::setw(11)
        << std::fixed << std::setprecision(1) << 100.0 * c.retention() << "%\n";
  };
  out << std::left << std::setw(9) << "strategy" << std::right << std::setw(8) << "input" << std::setw(8) << "kept"
      << std::setw(10) << "mismatch" << std::setw(13) << "unparseable" << std::setw(12) << "retained" << '\n';
  for (const auto& [s, c] : per_strategy) row(neraug::to_string(s), c);
  row("total", total());
  return out.str();
}

namespace {

// Linearized tokens with the display name of each entity in `masked`
// replaced by the placeholder.
std::string query_text(const TaggedSentence& s, const LabelSchema& schema, const std::vector<bool>& masked,
                       std::string_view placeholder) {
  const auto lin = linearize(s, schema).tokens;
  std::string out;
  std::size_t entity = 0;
  bool naming = false;
  auto append = [&](std::string_view tok) {
    if (!out.empty()) out += ' ';
    out += tok;
  };
  for (const auto& tok : lin) {
    if (naming && tok == kCloseBracket) {
      naming = false;
      ++entity;
      append(tok);
    } else if (naming) {
      if (!masked[entity]) append(tok);
    } else {
      append(tok);
      if (tok == kSeparator) {
        naming = true;
        if (masked[entity]) append(placeholder);
      }
    }
  }
  return out;
}

}  // namespace

TypeScoreRequest make_word2type_query(const AugmentedSample& sample, const LabelSchema& schema,
                                      std::string_view placeholder) {
  const auto n = sample.sentence.spans.size();
  return TypeScoreRequest{sample.id, query_text(sample.sentence, schema, std::vector<bool>(n, true), placeholder),
                          std::string(placeholder), n};
}

TypeScoreRequest make_single_type_query(const AugmentedSample& sample, const LabelSchema& schema,
                                        std::size_t position, std::string_view placeholder) {
  std::vector<bool> masked(sample.sentence.spans.size(), false);
  masked.at(position) = true;
  return TypeScoreRequest{sample.id + "@" + std::to_string(position),
                          query_text(sample.sentence, schema, masked, placeholder), std::string(placeholder), 1};
}

FilterResult filter(std::vector<AugmentedSample> samples, GenerationBackend& backend, const LabelSchema& schema,
                    const FilterOptions& options) {
  // Each sample owns a contiguous range of queries.
  std::vector<TypeScoreRequest> queries;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& s : samples) {
    const auto begin = queries.size();
    const auto n = s.sentence.spans.size();
    if (n > 0) {
      if (options.mode == QueryMode::Joint) {
        queries.push_back(make_word2type_query(s, schema, options.placeholder));
      } else {
        for (std::size_t k = 0; k < n; ++k) queries.push_back(make_single_type_query(s, schema, k, options.placeholder));
      }
    }
    ranges.emplace_back(begin, queries.size());
  }
  const auto answers = score_batch(queries, backend, options.max_in_flight, options.retry);

  FilterResult result;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto& s = samples[i];
    auto& counts = result.report.per_strategy[s.strategy];
    ++counts.input;
    std::vector<std::string> predicted;
    bool failed = false;
    for (auto q = ranges[i].first; q < ranges[i].second; ++q) {
      if (!answers[q]) {
        failed = true;
        if (answers[q].error().code() == ErrorCode::BackendUnavailable) ++counts.unavailable;
        break;
      }
      const auto& names = answers[q].value().names;
      predicted.insert(predicted.end(), names.begin(), names.end());
    }
    if (failed) {
      s.verdict = FilterVerdict::DroppedUnparseable;
      ++counts.dropped_unparseable;
      result.dropped.push_back(std::move(s));
      continue;
    }
    bool consistent = predicted.size() == s.sentence.spans.size();
    for (std::size_t k = 0; consistent && k < predicted.size(); ++k)
      consistent = normalize_name(predicted[k]) == schema.display_name(s.sentence.spans[k].type);
    s.verdict = consistent ? FilterVerdict::Kept : FilterVerdict::DroppedMismatch;
    if (consistent) {
      ++counts.kept;
      result.kept.push_back(std::move(s));
    } else {
      ++counts.dropped_mismatch;
      result.dropped.push_back(std::move(s));
    }
  }
  return result;
}

}  // namespace neraug
