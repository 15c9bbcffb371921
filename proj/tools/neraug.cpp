// Command-line front end for the augmentation pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "neraug/augment.hpp"
#include "neraug/config.hpp"
#include "neraug/filter.hpp"
#include "neraug/linearizer.hpp"
#include "neraug/metrics.hpp"
#include "neraug/mixup.hpp"
#include "neraug/pipeline.hpp"
#include "neraug/trainer.hpp"

namespace fs = std::filesystem;
using namespace neraug;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kBackendError = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string out;
  std::string schema;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
  cmd->add_option("--backend", o.backend, "generation backend")->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--schema", o.schema, "label schema file");
  cmd->add_option("--set", o.sets, "extra key=value setting, repeatable");
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw Error(ErrorCode::ConfigError, what + " is required");
  if (!fs::exists(path)) throw Error(ErrorCode::ConfigError, what + ": no such file '" + path + "'");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.backend.empty()) cfg.backend = backend_from_string(o.backend);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.schema.empty()) cfg.schema_path = o.schema;
  require_file(cfg.schema_path, "schema");
  return cfg;
}

LabelSchema schema_of(const RunConfig& cfg) { return LabelSchema::load(cfg.schema_path); }

std::unique_ptr<Generator> make_generator(const RunConfig& cfg, const LabelSchema& schema) {
  if (cfg.backend == BackendKind::Http) return std::make_unique<HttpGenerator>(cfg.backend_url, schema);
  return std::make_unique<MockGenerator>(schema, load_lexicons(cfg), cfg.seed);
}

std::unique_ptr<NerTrainer> make_trainer(const RunConfig& cfg, const LabelSchema& schema) {
  if (cfg.backend == BackendKind::Http)
    return std::make_unique<HttpTrainer>(cfg.trainer_url.empty() ? cfg.backend_url : cfg.trainer_url, schema,
                                         cfg.timeout);
  return std::make_unique<StubTrainer>(schema, cfg.confidence);
}

fs::path out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  return cfg.out_dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
}

int sample_shots_cmd(const CommonOptions& o) {
  const auto cfg = resolve(o);
  require_file(cfg.train_path, "train");
  if (cfg.shots == 0) throw Error(ErrorCode::ConfigError, "shots must be at least 1");
  const auto split = sample_shots(load_conll(cfg.train_path, schema_of(cfg)), cfg.shots, cfg.seed);
  const auto dir = out_dir(cfg);
  write_text(dir / "train.conll", emit_conll(split.train));
  write_text(dir / "unlabeled.conll", emit_conll(split.unlabeled));
  const Json summary{{"shots", cfg.shots},
                     {"seed", cfg.seed},
                     {"train", split.train.sentences.size()},
                     {"unlabeled", split.unlabeled.sentences.size()},
                     {"warnings", split.warnings}};
  write_text(dir / "shots.json", summary.dump(2) + "\n");
  for (const auto& w : split.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << summary.dump() << '\n';
  return kOk;
}

int linearize_cmd(const CommonOptions& o, const std::string& input, bool reverse) {
  const auto cfg = resolve(o);
  const auto path = input.empty() ? cfg.train_path : input;
  require_file(path, "input");
  const auto schema = schema_of(cfg);
  std::ostringstream text;
  if (reverse) {
    std::ifstream in(path);
    Dataset d{schema, {}, true};
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      d.sentences.push_back(delinearize(line, schema, "l" + std::to_string(n++)));
    }
    emit_conll(d, text);
  } else {
    for (const auto& s : load_conll(path, schema).sentences) text << linearize_string(s, schema) << '\n';
  }
  if (o.out.empty()) {
    std::cout << text.str();
  } else {
    write_text(out_dir(cfg) / (reverse ? "delinearized.conll" : "linearized.txt"), text.str());
  }
  return kOk;
}

int augment_cmd(const CommonOptions& o, const std::string& input, bool templates_only) {
  const auto cfg = resolve(o);
  const auto path = input.empty() ? cfg.train_path : input;
  require_file(path, "input");
  cfg.strategy.validate();
  cfg.ops.validate();
  const auto schema = schema_of(cfg);
  const auto d = load_conll(path, schema);
  const auto dir = out_dir(cfg);
  if (templates_only) {
    AugmentReport report;
    std::ostringstream lines;
    for (const auto& [id, t] : plan_templates(d, cfg.augment_config(cfg.seed), &report)) {
      auto j = to_json(t, schema);
      j["id"] = id;
      lines << j.dump() << '\n';
    }
    write_text(dir / "templates.jsonl", lines.str());
    write_text(dir / "augment_report.json", report.to_json().dump(2) + "\n");
    return kOk;
  }
  auto gen = make_generator(cfg, schema);
  gen->train(d);
  const auto result = augment(d, cfg.augment_config(cfg.seed), gen->backend());
  std::ostringstream lines;
  write_samples(lines, result.samples, schema);
  write_text(dir / "samples.jsonl", lines.str());
  const auto report = result.report.to_json();
  write_text(dir / "augment_report.json", report.dump(2) + "\n");
  std::cout << report["counting_identity"].dump() << '\n';
  const auto failed = result.report.total().fill_failed;
  if (failed.contains("BackendUnavailable")) throw Error(ErrorCode::BackendUnavailable, "fills failed after retries");
  return kOk;
}

int filter_cmd(const CommonOptions& o, const std::string& samples_path) {
  const auto cfg = resolve(o);
  require_file(samples_path, "samples");
  const auto schema = schema_of(cfg);
  auto gen = make_generator(cfg, schema);
  // The mock scorer knows the training entities, as a trained model would.
  gen->train(cfg.train_path.empty() ? Dataset{schema, {}, true} : load_conll(cfg.train_path, schema));
  const auto result = filter(load_samples(samples_path, schema), gen->backend(), schema, cfg.filter_options());
  const auto dir = out_dir(cfg);
  std::ostringstream kept, dropped;
  write_samples(kept, result.kept, schema);
  write_samples(dropped, result.dropped, schema);
  write_text(dir / "kept.jsonl", kept.str());
  write_text(dir / "dropped.jsonl", dropped.str());
  write_text(dir / "filter_report.json", result.report.to_json().dump(2) + "\n");
  std::cout << result.report.table();
  if (result.report.total().unavailable > 0)
    throw Error(ErrorCode::BackendUnavailable, "type queries failed after retries");
  return kOk;
}

int pairs_cmd(const CommonOptions& o, const std::string& samples_path, const std::string& originals) {
  const auto cfg = resolve(o);
  require_file(samples_path, "samples");
  const auto parents = originals.empty() ? cfg.train_path : originals;
  require_file(parents, "originals");
  cfg.mixup.validate();
  const auto schema = schema_of(cfg);
  const auto pairs = build_pairs(load_samples(samples_path, schema), load_conll(parents, schema), cfg.mixup, cfg.seed);
  std::ostringstream lines;
  write_pairs(lines, pairs);
  write_text(out_dir(cfg) / "pairs.jsonl", lines.str());
  std::cout << Json{{"pairs", pairs.size()}}.dump() << '\n';
  return kOk;
}

int run_cmd(const CommonOptions& o, bool star, bool fresh) {
  const auto cfg = resolve(o);
  cfg.validate();
  const auto inputs = load_inputs(cfg);
  for (const auto& w : inputs.warnings) std::cerr << "warning: " << w << '\n';
  const auto schema = inputs.train.schema;
  auto gen = make_generator(cfg, schema);
  auto trainer = make_trainer(cfg, schema);
  RunOptions opt;
  opt.out_dir = cfg.out_dir;
  opt.fresh = fresh;
  const auto outcome = star ? run_with_unlabeled(cfg, inputs, *gen, *trainer, opt)
                            : run_pipeline(cfg, inputs, *gen, *trainer, opt);
  Json summary{{"model", outcome.model},
               {"phases", outcome.records.size()},
               {"resumed", outcome.resumed},
               {"executed", outcome.executed},
               {"manifest", (fs::path(cfg.out_dir) / Manifest::kFileName).string()}};
  if (outcome.eval) summary["f1"] = outcome.eval->f1;
  std::cout << summary.dump() << '\n';
  return kOk;
}

int eval_cmd(const CommonOptions& o, const std::string& gold, const std::string& pred) {
  const auto cfg = resolve(o);
  require_file(gold, "gold");
  require_file(pred, "pred");
  const auto schema = schema_of(cfg);
  const auto s = micro_f1(load_conll(gold, schema), load_conll(pred, schema, ParseMode::Lenient));
  const Json j{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
               {"tp", s.tp},               {"fp", s.fp},         {"fn", s.fn}};
  if (!o.out.empty()) write_text(out_dir(cfg) / "eval.json", j.dump(2) + "\n");
  std::cout << j.dump() << '\n';
  return kOk;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidKM:
    case ErrorCode::InvalidSchema:
    case ErrorCode::MissingEmbeddings:
    case ErrorCode::SingletonSchema:
      return kConfigError;
    case ErrorCode::BackendUnavailable:
      return kBackendError;
    default:
      return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot NER data augmentation pipeline"};
  app.require_subcommand(1);
  CommonOptions o;
  std::string input, samples, originals, gold, pred;
  bool reverse = false, templates_only = false, fresh = false;

  auto* shots = app.add_subcommand("sample-shots", "sample a K-shot training split");
  add_common(shots, o);

  auto* lin = app.add_subcommand("linearize", "CoNLL to bracketed text, or back with --reverse");
  add_common(lin, o);
  lin->add_option("input", input, "input file (default: train from the config)");
  lin->add_flag("--reverse", reverse, "parse bracketed lines back into CoNLL");

  auto* aug = app.add_subcommand("augment", "generate augmented samples");
  add_common(aug, o);
  aug->add_option("--input", input, "CoNLL input (default: train from the config)");
  aug->add_flag("--templates-only", templates_only, "write the masked templates without generating");

  auto* filt = app.add_subcommand("filter", "self-consistency filter over samples");
  add_common(filt, o);
  filt->add_option("--samples", samples, "samples JSON lines")->required();

  auto* prs = app.add_subcommand("pairs", "mixup pairs for label-flipping samples");
  add_common(prs, o);
  prs->add_option("--samples", samples, "samples JSON lines")->required();
  prs->add_option("--originals", originals, "CoNLL originals (default: train from the config)");

  auto* run = app.add_subcommand("run", "full few-shot loop");
  add_common(run, o);
  run->add_flag("--fresh", fresh, "discard an existing manifest instead of resuming");

  auto* star = app.add_subcommand("run-star", "full loop plus the unlabeled-data loop");
  add_common(star, o);
  star->add_flag("--fresh", fresh, "discard an existing manifest instead of resuming");

  auto* ev = app.add_subcommand("eval", "span-level micro F1");
  add_common(ev, o);
  ev->add_option("--gold", gold, "gold CoNLL")->required();
  ev->add_option("--pred", pred, "predicted CoNLL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*shots) return sample_shots_cmd(o);
    if (*lin) return linearize_cmd(o, input, reverse);
    if (*aug) return augment_cmd(o, input, templates_only);
    if (*filt) return filter_cmd(o, samples);
    if (*prs) return pairs_cmd(o, samples, originals);
    if (*run) return run_cmd(o, false, fresh);
    if (*star) return run_cmd(o, true, fresh);
    if (*ev) return eval_cmd(o, gold, pred);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
