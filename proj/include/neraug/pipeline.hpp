#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "neraug/config.hpp"
#include "neraug/http_backend.hpp"
#include "neraug/manifest.hpp"
#include "neraug/metrics.hpp"
#include "neraug/mock_backend.hpp"
#include "neraug/trainer.hpp"

namespace neraug {

/// The generator side of a run: a training step on the few-shot set, then a
/// backend for filling and type scoring.
class Generator {
 public:
  virtual ~Generator() = default;
  /// Returns a summary for the manifest.
  virtual Json train(const Dataset& d) = 0;
  virtual GenerationBackend& backend() = 0;
};

/// Training absorbs the few-shot entities into the base lexicons.
class MockGenerator : public Generator {
 public:
  MockGenerator(LabelSchema schema, MockLexicons base, std::uint64_t seed);
  Json train(const Dataset& d) override;
  GenerationBackend& backend() override;

 private:
  LabelSchema schema_;
  MockLexicons base_;
  std::uint64_t seed_;
  std::unique_ptr<MockBackend> backend_;
};

/// The protocol has no generator-training endpoint; the server is expected
/// to hold a generator prepared out of band.
class HttpGenerator : public Generator {
 public:
  HttpGenerator(std::string base_url, LabelSchema schema);
  Json train(const Dataset& d) override;
  GenerationBackend& backend() override { return backend_; }

 private:
  std::string url_;
  HttpBackend backend_;
};

struct RunInputs {
  Dataset train;
  /// Tokens only; any gold spans are removed on load.
  std::vector<TaggedSentence> unlabeled;
  std::optional<Dataset> test;
  std::vector<std::string> warnings;
};

/// Reads the configured files and applies few-shot sampling. When shots are
/// sampled and no unlabeled file is given, the remainder becomes the
/// unlabeled pool.
RunInputs load_inputs(const RunConfig& cfg);

MockLexicons load_lexicons(const RunConfig& cfg);

struct RunOptions {
  std::string out_dir;
  /// Discard an existing manifest instead of resuming it.
  bool fresh = false;
  /// Stop after this many newly executed phases. Used to exercise resume.
  std::size_t max_new_phases = std::numeric_limits<std::size_t>::max();
};

struct RunOutcome {
  std::string model;
  std::vector<PhaseRecord> records;
  std::size_t resumed = 0;
  std::size_t executed = 0;
  bool complete = false;
  std::optional<SpanScore> eval;
};

/// Few-shot loop: train the generator, augment, filter, train, then
/// `iterations` rounds of confidence selection and retraining. Every phase
/// is recorded in <out_dir>/manifest.jsonl; an existing manifest with the
/// same header is resumed from its last completed phase.
RunOutcome run_pipeline(const RunConfig& cfg, const RunInputs& inputs, Generator& generator, NerTrainer& trainer,
                     const RunOptions& options);

/// run_pipeline followed by the unlabeled loop: annotate the pool, keep
/// confident pseudo-labels, augment them, then `iterations` rounds of
/// selection over all augmented data, re-annotation and retraining.
/// An empty pool gives exactly the run_pipeline manifest.
RunOutcome run_with_unlabeled(const RunConfig& cfg, const RunInputs& inputs, Generator& generator, NerTrainer& trainer,
                          const RunOptions& options);

}  // namespace neraug
