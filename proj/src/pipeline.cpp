#include "neraug/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "neraug/augment.hpp"
#include "neraug/filter.hpp"
#include "neraug/hash.hpp"

namespace neraug {

MockGenerator::MockGenerator(LabelSchema schema, MockLexicons base, std::uint64_t seed)
    : schema_(std::move(schema)), base_(std::move(base)), seed_(seed) {}

Json MockGenerator::train(const Dataset& d) {
  auto lex = base_;
  lex.absorb(d);
  Json entries = Json::object();
  for (const auto& e : schema_.entries()) {
    const auto it = lex.entities.find(e.display_name);
    entries[e.display_name] = it == lex.entities.end() ? 0 : it->second.size();
  }
  Json summary{{"generator", "mock"}, {"entity_entries", entries}, {"context_entries", lex.context.size()}};
  backend_ = std::make_unique<MockBackend>(schema_, std::move(lex), seed_);
  return summary;
}

GenerationBackend& MockGenerator::backend() {
  if (!backend_) throw Error(ErrorCode::BackendUnavailable, "mock generator used before training");
  return *backend_;
}

HttpGenerator::HttpGenerator(std::string base_url, LabelSchema schema)
    : url_(base_url), backend_(std::move(base_url), std::move(schema)) {}

Json HttpGenerator::train(const Dataset&) { return Json{{"generator", "http"}, {"trained_here", false}}; }

MockLexicons load_lexicons(const RunConfig& cfg) {
  MockLexicons lex;
  for (const auto& [name, path] : cfg.lexicons) {
    if (name == "context") {
      lex.context = MockLexicons::load_list(path);
    } else {
      lex.entities[name] = MockLexicons::load_list(path);
    }
  }
  return lex;
}

RunInputs load_inputs(const RunConfig& cfg) {
  RunInputs in;
  const auto schema = LabelSchema::load(cfg.schema_path);
  auto train = load_conll(cfg.train_path, schema);
  std::vector<TaggedSentence> pool;
  if (cfg.shots > 0) {
    auto split = sample_shots(train, cfg.shots, cfg.seed);
    in.train = std::move(split.train);
    pool = std::move(split.unlabeled.sentences);
    in.warnings = std::move(split.warnings);
  } else {
    in.train = std::move(train);
  }
  if (!cfg.unlabeled_path.empty()) pool = load_conll(cfg.unlabeled_path, schema, ParseMode::Lenient, "u").sentences;
  for (auto& s : pool) in.unlabeled.push_back({std::move(s.id), std::move(s.tokens), {}});
  if (!cfg.test_path.empty()) in.test = load_conll(cfg.test_path, schema, ParseMode::Strict, "t");
  return in;
}

namespace {

std::string conll_text(const LabelSchema& schema, std::vector<TaggedSentence> sentences) {
  return emit_conll(Dataset{schema, std::move(sentences), true});
}

std::string samples_text(const std::vector<AugmentedSample>& samples, const LabelSchema& schema) {
  std::ostringstream out;
  write_samples(out, samples, schema);
  return out.str();
}

std::string pairs_text(const std::vector<MixupPair>& pairs) {
  std::ostringstream out;
  write_pairs(out, pairs);
  return out.str();
}

std::string annotations_text(const std::vector<ConfidenceAnnotation>& anns, const LabelSchema& schema) {
  std::ostringstream out;
  for (const auto& a : anns) {
    auto j = to_json(a.sentence, schema);
    j["confidence"] = a.confidence;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

std::vector<TaggedSentence> sentences_of(const std::vector<AugmentedSample>& samples) {
  std::vector<TaggedSentence> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.sentence);
  return out;
}

std::vector<TaggedSentence> sentences_of(const std::vector<ConfidenceAnnotation>& anns) {
  std::vector<TaggedSentence> out;
  out.reserve(anns.size());
  for (const auto& a : anns) out.push_back(a.sentence);
  return out;
}

class Orchestrator {
 public:
  Orchestrator(const RunConfig& cfg, const RunInputs& in, Generator& gen, NerTrainer& trainer,
               const RunOptions& opt)
      : cfg_(cfg), in_(in), schema_(in.train.schema), gen_(gen), trainer_(trainer), opt_(opt),
        manifest_(opt.out_dir) {}

  RunOutcome execute(bool star) {
    open_manifest();
    first_loop();
    if (star && !in_.unlabeled.empty()) second_loop();
    finish();
    RunOutcome out;
    out.model = model_;
    out.records = manifest_.records();
    out.resumed = resumed_;
    out.executed = executed_;
    out.complete = !stopped_;
    out.eval = eval_;
    return out;
  }

 private:
  // Header: settings plus the exact inputs the run starts from.
  void open_manifest() {
    const std::vector<std::pair<std::string, std::string>> inputs{
        {"train", conll_text(schema_, in_.train.sentences)},
        {"unlabeled", conll_text(schema_, in_.unlabeled)},
        {"schema", schema_text()},
    };
    Json arts = Json::array();
    for (const auto& [name, content] : inputs)
      arts.push_back({{"name", name}, {"path", "inputs/" + name + (name == "schema" ? ".tsv" : ".conll")},
                      {"sha256", sha256_hex(content)}});
    const auto canonical = cfg_.canonical();
    Json header{{"record", "header"},
                {"format", 1},
                {"config_sha256", sha256_hex(canonical)},
                {"seed", cfg_.seed},
                {"inputs", arts}};
    manifest_.open(header, opt_.fresh);
    for (std::size_t i = 0; i < inputs.size(); ++i)
      manifest_.write(inputs[i].first, arts[i]["path"].get<std::string>(), inputs[i].second, 0);
    manifest_.write("config", "inputs/config.txt", canonical, 0);
  }

  std::string schema_text() const {
    std::ostringstream out;
    schema_.write(out);
    return out.str();
  }

  std::uint64_t phase_seed(Phase p, std::size_t k) const {
    return splitmix64(cfg_.seed ^ fnv1a(std::string(to_string(p)) + "/" + std::to_string(k)));
  }

  std::string phase_dir(Phase p, std::size_t k) const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu_", step_);
    std::string name(to_string(p));
    if (p == Phase::Iterate || p == Phase::IterateUnlabeled) name.replace(name.size() - 1, 1, std::to_string(k));
    return buf + name + "/";
  }

  // Runs `exec` for a new phase, or `load` for one the manifest already has.
  template <class Exec, class Load>
  void phase(Phase p, std::size_t k, Exec exec, Load load) {
    if (stopped_) return;
    ++step_;
    const auto& done = manifest_.records();
    if (step_ <= done.size()) {
      const auto& r = done[step_ - 1];
      if (r.phase != p || r.k != k || !manifest_.verify(r))
        throw Error(ErrorCode::ConfigError, "manifest step " + std::to_string(step_) + " (" +
                                                std::string(to_string(r.phase)) +
                                                ") does not match this run or its files changed; start fresh");
      load(r);
      ++resumed_;
      return;
    }
    if (executed_ == opt_.max_new_phases) {
      stopped_ = true;
      return;
    }
    PhaseRecord r;
    r.step = step_;
    r.phase = p;
    r.k = k;
    r.seed = phase_seed(p, k);
    exec(r, phase_dir(p, k));
    manifest_.append(r);
    ++executed_;
  }

  std::string path(const PhaseRecord& r, std::string_view name) const { return manifest_.path(r.artifact(name)); }

  // Writes the training set, trains, and records the model handle.
  void train_phase(PhaseRecord& r, const std::string& dir, TrainJob job) {
    job.seed = r.seed;
    job.mixup = cfg_.mixup;
    job.align = cfg_.mixup_align;
    r.artifacts.push_back(manifest_.write("train", dir + "train.conll", conll_text(schema_, job.train), job.train.size()));
    r.artifacts.push_back(
        manifest_.write("references", dir + "references.conll", conll_text(schema_, job.references), job.references.size()));
    r.artifacts.push_back(manifest_.write("pairs", dir + "pairs.jsonl", pairs_text(job.pairs), job.pairs.size()));
    model_ = trainer_.train(job);
    r.artifacts.push_back(manifest_.write("model", dir + "model.json", json_text({{"model_id", model_}}), 1));
    r.summary["train_sentences"] = job.train.size();
    r.summary["mixup_pairs"] = job.pairs.size();
    r.summary["model"] = model_;
  }

  void reload_model(const PhaseRecord& r) {
    std::ifstream in(path(r, "model"));
    model_ = Json::parse(in).at("model_id").get<std::string>();
    if (trainer_.has_model(model_)) return;
    TrainJob job;
    job.train = load_conll(path(r, "train"), schema_).sentences;
    job.references = load_conll(path(r, "references"), schema_).sentences;
    std::ifstream pairs(path(r, "pairs"));
    job.pairs = read_pairs(pairs);
    job.seed = r.seed;
    job.mixup = cfg_.mixup;
    job.align = cfg_.mixup_align;
    if (trainer_.train(job) != model_)
      throw Error(ErrorCode::IoError, "retraining step " + std::to_string(r.step) + " gave a different model");
  }

  // Pairs for the flipped samples of a training set, with the parents that
  // the set itself does not contain.
  void add_pairs(TrainJob& job, const std::vector<AugmentedSample>& samples, const std::vector<TaggedSentence>& parents,
                 std::uint64_t seed) const {
    job.pairs = build_pairs(samples, Dataset{schema_, parents, true}, cfg_.mixup, seed);
    std::set<std::string> present, needed;
    for (const auto& s : job.train) present.insert(s.id);
    for (const auto& p : job.pairs) needed.insert(p.original_id);
    for (const auto& s : parents)
      if (needed.contains(s.id) && !present.contains(s.id)) job.references.push_back(s);
  }

  // Confidence selection over augmented samples; keeps their own labels.
  std::vector<AugmentedSample> select(PhaseRecord& r, const std::string& dir, const std::vector<AugmentedSample>& pool,
                                      const std::string& consumes) {
    const auto anns = trainer_.annotate(model_, sentences_of(pool));
    std::vector<AugmentedSample> kept;
    std::string lines;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      lines += Json{{"id", pool[i].id}, {"confidence", anns[i].confidence}}.dump() + "\n";
      if (anns[i].confidence >= cfg_.tau) kept.push_back(pool[i]);
    }
    r.consumes.push_back(consumes);
    r.artifacts.push_back(manifest_.write("confidences", dir + "confidences.jsonl", lines, pool.size()));
    r.artifacts.push_back(manifest_.write("selected", dir + "selected.jsonl", samples_text(kept, schema_), kept.size()));
    r.summary["pool"] = pool.size();
    r.summary["selected"] = kept.size();
    return kept;
  }

  std::vector<AugmentedSample> run_augment(PhaseRecord& r, const std::string& dir, const Dataset& d) {
    auto result = augment(d, cfg_.augment_config(r.seed), gen_.backend());
    const auto failed = result.report.total().fill_failed;
    if (const auto it = failed.find("BackendUnavailable"); it != failed.end())
      throw Error(ErrorCode::BackendUnavailable, std::to_string(it->second) + " fills failed after retries");
    const auto report = result.report.to_json();
    r.artifacts.push_back(manifest_.write("samples", dir + "samples.jsonl", samples_text(result.samples, schema_),
                                          result.samples.size()));
    r.artifacts.push_back(manifest_.write("report", dir + "augment_report.json", json_text(report), 1));
    r.summary["counting_identity"] = report["counting_identity"];
    return std::move(result.samples);
  }

  void first_loop() {
    phase(
        Phase::TrainLm, 0,
        [&](PhaseRecord& r, const std::string& dir) {
          r.consumes = {"inputs/train.conll"};
          r.summary = gen_.train(in_.train);
          r.artifacts.push_back(manifest_.write("lm", dir + "lm.json", json_text(r.summary), 1));
        },
        [&](const PhaseRecord&) { gen_.train(in_.train); });

    std::string samples_path;
    phase(
        Phase::Augment, 0,
        [&](PhaseRecord& r, const std::string& dir) {
          r.consumes = {"inputs/train.conll", manifest_.records().back().artifact("lm").path};
          augmented_ = run_augment(r, dir, in_.train);
          samples_path = r.artifact("samples").path;
        },
        [&](const PhaseRecord& r) {
          augmented_ = load_samples(path(r, "samples"), schema_);
          samples_path = r.artifact("samples").path;
        });

    phase(
        Phase::Filter, 0,
        [&](PhaseRecord& r, const std::string& dir) {
          r.consumes = {samples_path};
          auto result = filter(augmented_, gen_.backend(), schema_, cfg_.filter_options());
          if (const auto n = result.report.total().unavailable; n > 0)
            throw Error(ErrorCode::BackendUnavailable, std::to_string(n) + " type queries failed after retries");
          kept_ = std::move(result.kept);
          r.artifacts.push_back(manifest_.write("kept", dir + "kept.jsonl", samples_text(kept_, schema_), kept_.size()));
          r.artifacts.push_back(manifest_.write("dropped", dir + "dropped.jsonl", samples_text(result.dropped, schema_),
                                                result.dropped.size()));
          r.artifacts.push_back(manifest_.write("report", dir + "filter_report.json", json_text(result.report.to_json()), 1));
          r.summary = result.report.to_json()["total"];
        },
        [&](const PhaseRecord& r) { kept_ = load_samples(path(r, "kept"), schema_); });
    kept_path_ = stopped_ ? "" : last_path("kept");

    phase(
        Phase::TrainNer0, 0,
        [&](PhaseRecord& r, const std::string& dir) {
          r.consumes = {kept_path_, "inputs/train.conll"};
          TrainJob job;
          job.train = sentences_of(kept_);
          add_pairs(job, kept_, in_.train.sentences, r.seed);
          train_phase(r, dir, std::move(job));
        },
        [&](const PhaseRecord& r) { reload_model(r); });

    for (std::size_t k = 1; k <= cfg_.iterations; ++k) {
      phase(
          Phase::Iterate, k,
          [&](PhaseRecord& r, const std::string& dir) {
            r.consumes = {last_path("model")};
            const auto selected = select(r, dir, kept_, kept_path_);
            r.consumes.push_back("inputs/train.conll");
            TrainJob job;
            job.train = in_.train.sentences;
            for (const auto& s : selected) job.train.push_back(s.sentence);
            add_pairs(job, selected, in_.train.sentences, r.seed);
            train_phase(r, dir, std::move(job));
          },
          [&](const PhaseRecord& r) { reload_model(r); });
    }
  }

  void second_loop() {
    phase(
        Phase::AnnotateUnlabeled, 0,
        [&](PhaseRecord& r, const std::string& dir) {
          r.consumes = {last_path("model"), "inputs/unlabeled.conll"};
          const auto anns = trainer_.annotate(model_, in_.unlabeled);
          pseudo_ = sentences_of(high_conf_select(anns, cfg_.tau));
          r.artifacts.push_back(
              manifest_.write("annotations", dir + "annotations.jsonl", annotations_text(anns, schema_), anns.size()));
          r.artifacts.push_back(manifest_.write("pseudo", dir + "pseudo.conll", conll_text(schema_, pseudo_), pseudo_.size()));
          r.summary = {{"annotated", anns.size()}, {"pseudo_labeled", pseudo_.size()}};
        },
        [&](const PhaseRecord& r) { pseudo_ = load_conll(path(r, "pseudo"), schema_).sentences; });
    const auto pseudo_path = stopped_ ? "" : last_path("pseudo");

    phase(
        Phase::AugmentUnlabeled, 0,
        [&](PhaseRecord& r, const std::string& dir) {
          r.consumes = {pseudo_path, manifest_.records().front().artifact("lm").path};
          augmented_unlabeled_ = run_augment(r, dir, Dataset{schema_, pseudo_, true});
        },
        [&](const PhaseRecord& r) { augmented_unlabeled_ = load_samples(path(r, "samples"), schema_); });
    const auto aug_path = stopped_ ? "" : last_path("samples");

    auto pool = kept_;
    pool.insert(pool.end(), augmented_unlabeled_.begin(), augmented_unlabeled_.end());
    auto parents = in_.train.sentences;
    parents.insert(parents.end(), pseudo_.begin(), pseudo_.end());

    for (std::size_t k = 1; k <= cfg_.iterations; ++k) {
      phase(
          Phase::IterateUnlabeled, k,
          [&](PhaseRecord& r, const std::string& dir) {
            r.consumes = {last_path("model")};
            const auto selected = select(r, dir, pool, kept_path_);
            r.consumes.push_back(aug_path);
            r.consumes.push_back("inputs/unlabeled.conll");
            const auto anns = trainer_.annotate(model_, in_.unlabeled);
            const auto reannotated =
                sentences_of(cfg_.filter_reannotated ? high_conf_select(anns, cfg_.tau) : anns);
            r.artifacts.push_back(
                manifest_.write("annotations", dir + "annotations.jsonl", annotations_text(anns, schema_), anns.size()));
            r.consumes.push_back("inputs/train.conll");
            TrainJob job;
            job.train = in_.train.sentences;
            for (const auto& s : selected) job.train.push_back(s.sentence);
            job.train.insert(job.train.end(), reannotated.begin(), reannotated.end());
            add_pairs(job, selected, parents, r.seed);
            r.summary["reannotated_kept"] = reannotated.size();
            train_phase(r, dir, std::move(job));
          },
          [&](const PhaseRecord& r) { reload_model(r); });
    }
  }

  void finish() {
    phase(
        Phase::Done, 0,
        [&](PhaseRecord& r, const std::string& dir) {
          r.consumes = {last_path("model")};
          r.artifacts.push_back(manifest_.write("model", dir + "model.json", json_text({{"model_id", model_}}), 1));
          r.summary["model"] = model_;
          if (!in_.test) return;
          std::vector<TaggedSentence> bare;
          for (const auto& s : in_.test->sentences) bare.push_back({s.id, s.tokens, {}});
          const auto pred = sentences_of(trainer_.annotate(model_, bare));
          const auto score = micro_f1(in_.test->sentences, pred);
          eval_ = score;
          const Json ej{{"precision", score.precision}, {"recall", score.recall}, {"f1", score.f1},
                        {"tp", score.tp},               {"fp", score.fp},         {"fn", score.fn}};
          r.artifacts.push_back(manifest_.write("predictions", dir + "predictions.conll", conll_text(schema_, pred), pred.size()));
          r.artifacts.push_back(manifest_.write("eval", dir + "eval.json", json_text(ej), 1));
          r.summary["eval"] = ej;
        },
        [&](const PhaseRecord& r) {
          std::ifstream in(path(r, "model"));
          model_ = Json::parse(in).at("model_id").get<std::string>();
          if (r.summary.contains("eval")) {
            const auto& e = r.summary["eval"];
            eval_ = SpanScore{e["tp"], e["fp"], e["fn"], e["precision"], e["recall"], e["f1"]};
          }
        });
  }

  // Path of the newest artifact with this name.
  std::string last_path(std::string_view name) const {
    const auto& recs = manifest_.records();
    for (auto it = recs.rbegin(); it != recs.rend(); ++it)
      for (const auto& a : it->artifacts)
        if (a.name == name) return a.path;
    throw Error(ErrorCode::IoError, "no '" + std::string(name) + "' artifact recorded yet");
  }

  const RunConfig& cfg_;
  const RunInputs& in_;
  const LabelSchema& schema_;
  Generator& gen_;
  NerTrainer& trainer_;
  const RunOptions& opt_;
  Manifest manifest_;

  std::size_t step_ = 0, resumed_ = 0, executed_ = 0;
  bool stopped_ = false;
  std::string model_;
  std::vector<AugmentedSample> augmented_, kept_, augmented_unlabeled_;
  std::string kept_path_;
  std::vector<TaggedSentence> pseudo_;
  std::optional<SpanScore> eval_;
};

}  // namespace

RunOutcome run_pipeline(const RunConfig& cfg, const RunInputs& inputs, Generator& generator, NerTrainer& trainer,
                     const RunOptions& options) {
  return Orchestrator(cfg, inputs, generator, trainer, options).execute(false);
}

RunOutcome run_with_unlabeled(const RunConfig& cfg, const RunInputs& inputs, Generator& generator, NerTrainer& trainer,
                          const RunOptions& options) {
  return Orchestrator(cfg, inputs, generator, trainer, options).execute(true);
}

}  // namespace neraug
