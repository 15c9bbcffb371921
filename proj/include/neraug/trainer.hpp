#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "neraug/corpus.hpp"
#include "neraug/http_backend.hpp"
#include "neraug/metrics.hpp"
#include "neraug/mixup.hpp"

namespace neraug {

/// Everything one NER training call needs. `references` holds the originals
/// named by mixup pairs that are not themselves in `train`.
struct TrainJob {
  std::vector<TaggedSentence> train;
  std::vector<TaggedSentence> references;
  std::vector<MixupPair> pairs;
  MixupConfig mixup;
  AlignMode align = AlignMode::Pad;
  std::uint64_t seed = 0;
};

class NerTrainer {
 public:
  virtual ~NerTrainer() = default;
  /// Returns an opaque model handle.
  virtual std::string train(const TrainJob& job) = 0;
  virtual std::vector<ConfidenceAnnotation> annotate(const std::string& model,
                                                     const std::vector<TaggedSentence>& sentences) = 0;
  /// False if the handle must be re-created by training again.
  virtual bool has_model(const std::string& model) const = 0;
};

/// Deterministic gazetteer tagger. Training memorizes entity surface forms;
/// annotation tags the leftmost longest known form. Token probabilities
/// depend on how ambiguous each word was in training, which gives the
/// confidence gate something to bite on.
class StubTrainer : public NerTrainer {
 public:
  explicit StubTrainer(LabelSchema schema, ConfidencePolicy policy = ConfidencePolicy::Min);

  std::string train(const TrainJob& job) override;
  std::vector<ConfidenceAnnotation> annotate(const std::string& model,
                                             const std::vector<TaggedSentence>& sentences) override;
  bool has_model(const std::string& model) const override;

  /// Tag probability rows for one sentence under a trained model.
  Eigen::MatrixXd token_probabilities(const std::string& model, const TaggedSentence& s) const;

 private:
  struct Gazetteer {
    std::map<std::vector<std::string>, std::vector<std::size_t>> forms;  // type counts per form
    std::set<std::string> entity_words;
    std::size_t longest = 0;
  };
  struct Tagging {
    std::vector<EntitySpan> spans;
    Eigen::MatrixXd probs;
  };
  Tagging tag(const Gazetteer& g, const TaggedSentence& s) const;
  const Gazetteer& model(const std::string& handle) const;

  LabelSchema schema_;
  ConfidencePolicy policy_;
  mutable std::mutex mu_;
  std::map<std::string, Gazetteer> models_;
};

Json to_json(const TrainJob& job, const LabelSchema& schema);
TrainJob train_job_from_json(const Json& j, const LabelSchema& schema);

/// POST /v1/ner/train and POST /v1/ner/annotate.
class HttpTrainer : public NerTrainer {
 public:
  HttpTrainer(std::string base_url, LabelSchema schema, std::chrono::seconds timeout = std::chrono::seconds(600));

  std::string train(const TrainJob& job) override;
  std::vector<ConfidenceAnnotation> annotate(const std::string& model,
                                             const std::vector<TaggedSentence>& sentences) override;
  /// The server owns its models; a handle is trusted until it is refused.
  bool has_model(const std::string&) const override { return true; }

 private:
  HttpClient client_;
  LabelSchema schema_;
};

}  // namespace neraug
