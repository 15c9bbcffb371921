#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "neraug/config.hpp"
#include "neraug/hash.hpp"
#include "neraug/manifest.hpp"
#include "neraug/pipeline.hpp"
#include "stub_server.hpp"

using namespace neraug;
using namespace neraug::testing;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("neraug_pipeline_" + name);
  fs::remove_all(dir);
  return dir.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

RunConfig toy_config() {
  std::istringstream text(
      "# toy run\n"
      "train = toy.conll\n"
      "schema = conll_schema.tsv\n"
      "shots = 3\n"
      "iterations = 2\n"
      "seed = 42\n"
      "retry_base_ms = 0\n"
      "lexicon.person = lexicon/person.txt\n"
      "lexicon.organization = lexicon/organization.txt\n"
      "lexicon.location = lexicon/location.txt\n"
      "lexicon.miscellaneous = lexicon/miscellaneous.txt\n"
      "lexicon.context = lexicon/context.txt\n");
  return parse_config(text, NERAUG_DATA_DIR);
}

struct MockRun {
  RunConfig cfg = toy_config();
  RunInputs inputs;
  MockRun() { inputs = load_inputs(cfg); }

  RunOutcome go(const std::string& dir, bool star, RunOptions opt = {}) {
    MockGenerator gen(inputs.train.schema, load_lexicons(cfg), cfg.seed);
    StubTrainer trainer(inputs.train.schema, cfg.confidence);
    opt.out_dir = dir;
    return star ? run_with_unlabeled(cfg, inputs, gen, trainer, opt) : run_pipeline(cfg, inputs, gen, trainer, opt);
  }
};

std::vector<std::string> phases(const RunOutcome& o) {
  std::vector<std::string> out;
  for (const auto& r : o.records) out.push_back(std::string(to_string(r.phase)) + (r.k ? std::to_string(r.k) : ""));
  return out;
}

}  // namespace

TEST_CASE("config files parse, resolve paths and reject unknown keys") {
  const auto cfg = toy_config();
  CHECK(cfg.train_path == std::string(NERAUG_DATA_DIR) + "/toy.conll");
  CHECK(cfg.shots == 3);
  CHECK(cfg.tau == 0.9);
  CHECK(cfg.mixup.alpha == 130);
  CHECK(cfg.mixup.layers == std::vector<int>{8, 9, 10});
  CHECK(cfg.strategies.size() == 4);
  CHECK(cfg.lexicons.size() == 5);
  CHECK_NOTHROW(cfg.validate());

  auto expect_config_error = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_config(in).validate();
      FAIL("accepted: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
    }
  };
  expect_config_error("colour = blue\n");
  expect_config_error("tau = high\n");
  expect_config_error("no separator here\n");
  expect_config_error("strategy = sa, zz\n");
  expect_config_error("backend = grpc\n");
  expect_config_error("train = /nonexistent.conll\nschema = /nonexistent.tsv\n");

  RunConfig c = toy_config();
  c.set("tau", "0");
  CHECK_THROWS_AS(c.validate(), Error);
  c = toy_config();
  c.set("K", "2");
  c.set("M_choices", "1,2");
  CHECK_THROWS_AS(c.validate(), Error);
  c = toy_config();
  c.set("strategy", "er, sa");
  CHECK(c.strategies == std::vector<Strategy>{Strategy::ER, Strategy::SA});
  CHECK(c.canonical().find("strategy = er,sa\n") != std::string::npos);
  CHECK(c.canonical() == RunConfig(c).canonical());
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("manifest is append-only and guards its header") {
  const auto dir = scratch("manifest");
  const Json header{{"record", "header"}, {"v", 1}};
  Manifest m(dir);
  m.open(header);
  PhaseRecord r;
  r.step = 1;
  r.artifacts.push_back(m.write("x", "01/x.txt", "hello\n", 1));
  m.append(r);
  const auto first = read_file(m.file());

  Manifest again(dir);
  again.open(header);
  REQUIRE(again.records().size() == 1);
  CHECK(again.verify(again.records()[0]));
  r.step = 2;
  again.append(r);
  CHECK(read_file(m.file()).rfind(first, 0) == 0);

  std::ofstream(dir + "/01/x.txt") << "tampered\n";
  CHECK_FALSE(again.verify(again.records()[0]));

  Manifest other(dir);
  CHECK_THROWS_AS(other.open(Json{{"record", "header"}, {"v", 2}}), Error);
  other.open(Json{{"record", "header"}, {"v", 2}}, true);
  CHECK(other.records().empty());
}

TEST_CASE("stub trainer tags what it has seen, deterministically") {
  const auto d = toy_corpus();
  StubTrainer t(d.schema);
  TrainJob job;
  job.train = d.sentences;
  const auto model = t.train(job);
  CHECK(model == StubTrainer(d.schema).train(job));
  CHECK(t.has_model(model));
  CHECK_FALSE(t.has_model("nope"));
  CHECK_THROWS_AS(t.annotate("nope", d.sentences), Error);

  const auto anns = t.annotate(model, d.sentences);
  REQUIRE(anns.size() == d.sentences.size());
  std::vector<TaggedSentence> pred;
  for (const auto& a : anns) {
    CHECK(a.confidence >= 0.0);
    CHECK(a.confidence <= 1.0);
    pred.push_back(a.sentence);
  }
  CHECK(micro_f1(d.sentences, pred).f1 > 0.8);
  for (const auto& s : d.sentences) CHECK(is_distribution_sequence(t.token_probabilities(model, s)));

  // The mean policy is never below the min policy.
  StubTrainer mean(d.schema, ConfidencePolicy::Mean);
  const auto m2 = mean.train(job);
  const auto mean_anns = mean.annotate(m2, d.sentences);
  for (std::size_t i = 0; i < anns.size(); ++i) CHECK(mean_anns[i].confidence >= anns[i].confidence);
}

TEST_CASE("HTTP trainer speaks the NER endpoints") {
  const auto d = toy_corpus();
  MockBackend gen(d.schema, toy_lexicons(d), 1);
  StubTrainer remote(d.schema), local(d.schema);
  StubModelServer server(d.schema, gen, remote);
  HttpTrainer http(server.url(), d.schema);
  TrainJob job;
  job.train = d.sentences;
  job.pairs = {{"x#elc-0", "x", 0.97, 9}};
  const auto model = http.train(job);
  CHECK(model == local.train(job));
  const auto via_http = http.annotate(model, d.sentences);
  const auto direct = local.annotate(model, d.sentences);
  REQUIRE(via_http.size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK(via_http[i].sentence == direct[i].sentence);
    CHECK(via_http[i].confidence == direct[i].confidence);
  }
  CHECK(server.train_calls == 1);
  CHECK(server.annotate_calls == 1);
  try {
    http.annotate("missing-model", d.sentences);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BackendUnavailable);
  }
}

TEST_CASE("run follows the phase order and is byte-identical across runs") {
  MockRun run;
  const auto dir_a = scratch("run_a"), dir_b = scratch("run_b");
  const auto a = run.go(dir_a, false);
  const auto b = run.go(dir_b, false);
  CHECK(a.complete);
  CHECK(a.executed == a.records.size());
  CHECK(phases(a) ==
        std::vector<std::string>{"train_lm", "augment", "filter", "train_ner_0", "iterate_k1", "iterate_k2", "done"});
  CHECK(read_file(dir_a + "/manifest.jsonl") == read_file(dir_b + "/manifest.jsonl"));
  CHECK(a.model == b.model);

  const auto& aug = a.records[1];
  CHECK(aug.summary["counting_identity"]["holds"].get<bool>());
  CHECK(aug.summary["counting_identity"]["expected_planned"].get<std::size_t>() ==
        run.inputs.train.sentences.size() * 4);
}

TEST_CASE("every consumed artifact was produced earlier") {
  MockRun run;
  const auto dir = scratch("consumes");
  const auto o = run.go(dir, true);
  std::set<std::string> known{"inputs/train.conll", "inputs/unlabeled.conll", "inputs/schema.tsv"};
  for (const auto& r : o.records) {
    for (const auto& c : r.consumes) CHECK_MESSAGE(known.contains(c), c << " consumed by step " << r.step);
    for (const auto& art : r.artifacts) {
      known.insert(art.path);
      CHECK(sha256_file(dir + "/" + art.path) == art.sha256);
    }
  }
}

TEST_CASE("run-star appends the unlabeled loop and is deterministic") {
  MockRun run;
  REQUIRE_FALSE(run.inputs.unlabeled.empty());
  const auto dir_a = scratch("star_a"), dir_b = scratch("star_b");
  const auto a = run.go(dir_a, true);
  run.go(dir_b, true);
  CHECK(phases(a) == std::vector<std::string>{"train_lm", "augment", "filter", "train_ner_0", "iterate_k1",
                                              "iterate_k2", "annotate_unlabeled", "augment_unlabeled",
                                              "iterate_unlabeled_k1", "iterate_unlabeled_k2", "done"});
  CHECK(read_file(dir_a + "/manifest.jsonl") == read_file(dir_b + "/manifest.jsonl"));
  CHECK(a.records[7].summary["counting_identity"]["holds"].get<bool>());
}

TEST_CASE("run-star with an empty unlabeled pool equals run") {
  MockRun run;
  run.inputs.unlabeled.clear();
  const auto dir_a = scratch("empty_u_run"), dir_b = scratch("empty_u_star");
  run.go(dir_a, false);
  run.go(dir_b, true);
  CHECK(read_file(dir_a + "/manifest.jsonl") == read_file(dir_b + "/manifest.jsonl"));
}

TEST_CASE("an interrupted run resumes to the same manifest") {
  MockRun run;
  const auto whole = scratch("resume_whole"), parts = scratch("resume_parts");
  run.go(whole, true);
  RunOptions opt;
  opt.max_new_phases = 3;
  auto o = run.go(parts, true, opt);
  CHECK_FALSE(o.complete);
  CHECK(o.records.size() == 3);
  opt.max_new_phases = 4;
  o = run.go(parts, true, opt);
  CHECK(o.resumed == 3);
  CHECK(o.executed == 4);
  // A fresh process: the trainer has no models and rebuilds from files.
  o = run.go(parts, true);
  CHECK(o.resumed == 7);
  CHECK(o.complete);
  CHECK(read_file(whole + "/manifest.jsonl") == read_file(parts + "/manifest.jsonl"));

  // Finished runs resume entirely.
  o = run.go(parts, true);
  CHECK(o.executed == 0);
  CHECK(o.resumed == o.records.size());
}

TEST_CASE("resume refuses changed settings or tampered artifacts") {
  MockRun run;
  const auto dir = scratch("resume_guard");
  const auto o = run.go(dir, false);
  run.cfg.tau = 0.5;
  CHECK_THROWS_AS(run.go(dir, false), Error);
  RunOptions fresh;
  fresh.fresh = true;
  CHECK(run.go(dir, false, fresh).executed == o.records.size());

  std::ofstream(dir + "/" + o.records[2].artifact("kept").path, std::ios::app) << "\n";
  try {
    run.go(dir, false);
    FAIL("expected a refusal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

TEST_CASE("threshold extremes select everything or nothing") {
  MockRun run;
  run.cfg.tau = 1e-12;
  auto o = run.go(scratch("tau_low"), false);
  CHECK(o.records[4].summary["selected"] == o.records[4].summary["pool"]);
  run.cfg.tau = 1.5;
  o = run.go(scratch("tau_high"), false);
  CHECK(o.records[4].summary["selected"].get<std::size_t>() == 0);
  CHECK(o.records[4].summary["train_sentences"].get<std::size_t>() == run.inputs.train.sentences.size());
}

TEST_CASE("the pseudo-labeled pool shrinks as the threshold rises") {
  MockRun run;
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (double tau : {0.3, 0.6, 0.8, 0.9, 0.95, 1.0}) {
    run.cfg.tau = tau;
    const auto o = run.go(scratch("tau_mono"), true);
    const auto n = o.records[6].summary["pseudo_labeled"].get<std::size_t>();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("a run over HTTP matches the in-process run") {
  MockRun run;
  const auto dir_mock = scratch("http_mock"), dir_http = scratch("http_http");
  run.go(dir_mock, true);

  // The server side trains its generator the same way the mock phase does.
  auto lex = load_lexicons(run.cfg);
  lex.absorb(run.inputs.train);
  MockBackend gen(run.inputs.train.schema, lex, run.cfg.seed);
  StubTrainer remote(run.inputs.train.schema, run.cfg.confidence);
  StubModelServer server(run.inputs.train.schema, gen, remote);

  HttpGenerator http_gen(server.url(), run.inputs.train.schema);
  HttpTrainer http_trainer(server.url(), run.inputs.train.schema);
  RunOptions opt;
  opt.out_dir = dir_http;
  run_with_unlabeled(run.cfg, run.inputs, http_gen, http_trainer, opt);
  CHECK(server.fill_calls > 0);
  CHECK(server.score_calls > 0);
  CHECK(server.train_calls == 5);

  // Only the generator summary in train_lm differs.
  auto a = lines_of(read_file(dir_mock + "/manifest.jsonl"));
  auto b = lines_of(read_file(dir_http + "/manifest.jsonl"));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 2; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("a test set is scored at the end") {
  MockRun run;
  run.cfg.set("test", "toy.conll", NERAUG_DATA_DIR);
  run.inputs = load_inputs(run.cfg);
  const auto o = run.go(scratch("eval"), false);
  REQUIRE(o.eval.has_value());
  CHECK(o.eval->f1 > 0.0);
  CHECK(o.eval->f1 <= 1.0);
  CHECK(o.records.back().summary.contains("eval"));
}
