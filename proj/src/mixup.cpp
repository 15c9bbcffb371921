#include "neraug/mixup.hpp"

#include <istream>
#include <ostream>
#include <set>

#include "neraug/serialize.hpp"

namespace neraug {

void MixupConfig::validate() const {
  if (!(alpha > 0) || !(beta > 0)) throw Error(ErrorCode::ConfigError, "mixup shapes must be positive");
  if (layers.empty()) throw Error(ErrorCode::ConfigError, "mixup layer choices are empty");
}

double sample_lambda(const MixupConfig& cfg, Rng& rng) {
  std::gamma_distribution<double> ga(cfg.alpha, 1.0), gb(cfg.beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

std::string_view to_string(AlignMode m) noexcept { return m == AlignMode::Pad ? "pad" : "truncate"; }

AlignMode align_mode_from_string(std::string_view name) {
  if (name == "pad") return AlignMode::Pad;
  if (name == "truncate") return AlignMode::Truncate;
  throw Error(ErrorCode::ConfigError, "unknown mixup alignment '" + std::string(name) + "'");
}

Eigen::MatrixXd one_hot_labels(const TaggedSentence& s, const LabelSchema& schema) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.size()), bio_tag_count(schema));
  y.col(0).setOnes();
  for (const auto& span : s.spans) {
    for (auto i = span.start; i < span.end; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      y(r, 0) = 0;
      y(r, bio_column(span.type, i == span.start)) = 1;
    }
  }
  return y;
}

std::vector<MixupPair> build_pairs(const std::vector<AugmentedSample>& augmented, const Dataset& originals,
                                   const MixupConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::set<std::string> parents;
  for (const auto& s : originals.sentences) parents.insert(s.id);
  std::vector<MixupPair> pairs;
  for (const auto& sample : augmented) {
    if (!sample.label_flipping()) continue;
    if (!parents.contains(sample.parent_id))
      throw Error(ErrorCode::MissingParent, sample.id + ": parent '" + sample.parent_id + "' not in originals");
    auto rng = derive_stream(seed, "mixup/" + sample.id);
    const double lambda = sample_lambda(cfg, rng);
    const int layer = cfg.layers[uniform_index(rng, 0, cfg.layers.size() - 1)];
    pairs.push_back({sample.id, sample.parent_id, lambda, layer});
  }
  return pairs;
}

void write_pairs(std::ostream& out, const std::vector<MixupPair>& pairs) {
  for (const auto& p : pairs) {
    Json j;
    j["flipped_id"] = p.flipped_id;
    j["original_id"] = p.original_id;
    j["lambda"] = p.lambda;
    j["layer"] = p.layer;
    out << j.dump() << '\n';
  }
}

std::vector<MixupPair> read_pairs(std::istream& in) {
  std::vector<MixupPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = Json::parse(line);
      pairs.push_back({j.at("flipped_id").get<std::string>(), j.at("original_id").get<std::string>(),
                       j.at("lambda").get<double>(), j.at("layer").get<int>()});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::MalformedLine, "pairs line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace neraug
