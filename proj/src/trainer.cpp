#include "neraug/trainer.hpp"

#include <algorithm>

#include "neraug/hash.hpp"

namespace neraug {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool capitalized(const std::string& s) { return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])); }

// Probability mass left on O for words outside every known form.
constexpr double kPlainWord = 0.99;
constexpr double kCapitalizedWord = 0.8;
constexpr double kEntityWord = 0.55;

}  // namespace

StubTrainer::StubTrainer(LabelSchema schema, ConfidencePolicy policy)
    : schema_(std::move(schema)), policy_(policy) {}

std::string StubTrainer::train(const TrainJob& job) {
  Gazetteer g;
  for (const auto& s : job.train) {
    for (const auto& span : s.spans) {
      std::vector<std::string> form;
      for (auto i = span.start; i < span.end; ++i) form.push_back(lower(s.tokens[i]));
      auto& counts = g.forms[form];
      counts.resize(schema_.size(), 0);
      ++counts[span.type.value];
      g.entity_words.insert(form.begin(), form.end());
      g.longest = std::max(g.longest, form.size());
    }
  }
  const auto handle = "stub-" + sha256_hex(to_json(job, schema_).dump()).substr(0, 16);
  std::lock_guard lock(mu_);
  models_.emplace(handle, std::move(g));
  return handle;
}

bool StubTrainer::has_model(const std::string& handle) const {
  std::lock_guard lock(mu_);
  return models_.contains(handle);
}

const StubTrainer::Gazetteer& StubTrainer::model(const std::string& handle) const {
  std::lock_guard lock(mu_);
  const auto it = models_.find(handle);
  if (it == models_.end()) throw Error(ErrorCode::BackendUnavailable, "unknown model '" + handle + "'");
  return it->second;
}

StubTrainer::Tagging StubTrainer::tag(const Gazetteer& g, const TaggedSentence& s) const {
  const auto n = s.tokens.size();
  Tagging t;
  t.probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), bio_tag_count(schema_));
  std::vector<std::string> words(n);
  std::transform(s.tokens.begin(), s.tokens.end(), words.begin(), lower);
  std::size_t i = 0;
  while (i < n) {
    bool matched = false;
    for (auto len = std::min(g.longest, n - i); len > 0 && !matched; --len) {
      const std::vector<std::string> form(words.begin() + static_cast<std::ptrdiff_t>(i),
                                          words.begin() + static_cast<std::ptrdiff_t>(i + len));
      const auto it = g.forms.find(form);
      if (it == g.forms.end()) continue;
      const auto& counts = it->second;
      const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      std::size_t total = 0;
      for (auto c : counts) total += c;
      const double p = static_cast<double>(counts[best]) / static_cast<double>(total);
      const TypeId type{best};
      for (auto j = i; j < i + len; ++j) {
        const auto r = static_cast<Eigen::Index>(j);
        const auto col = bio_column(type, j == i);
        t.probs(r, col) = p;
        // Remaining mass goes to O so rows stay normalized.
        t.probs(r, 0) += 1 - p;
      }
      t.spans.push_back({i, i + len, type});
      i += len;
      matched = true;
    }
    if (matched) continue;
    const double p = g.entity_words.contains(words[i]) ? kEntityWord
                     : (i > 0 && capitalized(s.tokens[i])) ? kCapitalizedWord
                                                            : kPlainWord;
    const auto r = static_cast<Eigen::Index>(i);
    t.probs(r, 0) = p;
    t.probs.row(r).tail(t.probs.cols() - 1).setConstant((1 - p) / static_cast<double>(t.probs.cols() - 1));
    ++i;
  }
  return t;
}

Eigen::MatrixXd StubTrainer::token_probabilities(const std::string& handle, const TaggedSentence& s) const {
  return tag(model(handle), s).probs;
}

std::vector<ConfidenceAnnotation> StubTrainer::annotate(const std::string& handle,
                                                        const std::vector<TaggedSentence>& sentences) {
  const auto& g = model(handle);
  std::vector<ConfidenceAnnotation> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    auto t = tag(g, s);
    out.push_back({TaggedSentence{s.id, s.tokens, std::move(t.spans)}, sentence_confidence(t.probs, policy_)});
  }
  return out;
}

Json to_json(const TrainJob& job, const LabelSchema& schema) {
  Json j;
  j["seed"] = job.seed;
  auto& train = j["train"] = Json::array();
  for (const auto& s : job.train) train.push_back(to_json(s, schema));
  auto& refs = j["references"] = Json::array();
  for (const auto& s : job.references) refs.push_back(to_json(s, schema));
  auto& pairs = j["pairs"] = Json::array();
  for (const auto& p : job.pairs)
    pairs.push_back({{"flipped_id", p.flipped_id}, {"original_id", p.original_id}, {"lambda", p.lambda}, {"layer", p.layer}});
  j["mixup"] = {{"alpha", job.mixup.alpha}, {"beta", job.mixup.beta}, {"layers", job.mixup.layers}, {"align", to_string(job.align)}};
  return j;
}

TrainJob train_job_from_json(const Json& j, const LabelSchema& schema) {
  TrainJob job;
  job.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("train")) job.train.push_back(sentence_from_json(s, schema));
  for (const auto& s : j.value("references", Json::array())) job.references.push_back(sentence_from_json(s, schema));
  for (const auto& p : j.value("pairs", Json::array()))
    job.pairs.push_back({p.at("flipped_id").get<std::string>(), p.at("original_id").get<std::string>(),
                         p.at("lambda").get<double>(), p.at("layer").get<int>()});
  if (j.contains("mixup")) {
    const auto& m = j["mixup"];
    job.mixup.alpha = m.at("alpha").get<double>();
    job.mixup.beta = m.at("beta").get<double>();
    job.mixup.layers = m.at("layers").get<std::vector<int>>();
    job.align = align_mode_from_string(m.value("align", "pad"));
  }
  return job;
}

HttpTrainer::HttpTrainer(std::string base_url, LabelSchema schema, std::chrono::seconds timeout)
    : client_(std::move(base_url), timeout), schema_(std::move(schema)) {}

std::string HttpTrainer::train(const TrainJob& job) {
  const auto resp = client_.post("/v1/ner/train", to_json(job, schema_));
  try {
    return resp.at("model_id").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("malformed /v1/ner/train response: ") + e.what());
  }
}

std::vector<ConfidenceAnnotation> HttpTrainer::annotate(const std::string& model,
                                                        const std::vector<TaggedSentence>& sentences) {
  Json body;
  body["model_id"] = model;
  auto& arr = body["sentences"] = Json::array();
  for (const auto& s : sentences) arr.push_back({{"id", s.id}, {"tokens", s.tokens}});
  const auto resp = client_.post("/v1/ner/annotate", body);
  std::vector<ConfidenceAnnotation> out;
  try {
    const auto& anns = resp.at("annotations");
    if (anns.size() != sentences.size())
      throw Error(ErrorCode::IdMismatch, "annotate returned " + std::to_string(anns.size()) + " records for " +
                                             std::to_string(sentences.size()) + " sentences");
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const auto& a = anns[i];
      if (a.at("id").get<std::string>() != sentences[i].id)
        throw Error(ErrorCode::IdMismatch, "annotation " + std::to_string(i) + " is for '" +
                                               a.at("id").get<std::string>() + "'");
      const double c = a.at("confidence").get<double>();
      if (!(c >= 0 && c <= 1)) throw Error(ErrorCode::BackendUnavailable, "confidence outside [0,1]");
      auto sentence = sentence_from_json(
          Json{{"id", sentences[i].id}, {"tokens", sentences[i].tokens}, {"spans", a.at("spans")}}, schema_);
      out.push_back({std::move(sentence), c});
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, std::string("malformed /v1/ner/annotate response: ") + e.what());
  }
  return out;
}

}  // namespace neraug
