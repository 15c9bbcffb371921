#include "neraug/manifest.hpp"

#include <array>
#include <filesystem>
#include <fstream>

#include "neraug/hash.hpp"

namespace neraug {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 9> kPhaseNames{{
    {Phase::TrainLm, "train_lm"},
    {Phase::Augment, "augment"},
    {Phase::Filter, "filter"},
    {Phase::TrainNer0, "train_ner_0"},
    {Phase::Iterate, "iterate_k"},
    {Phase::AnnotateUnlabeled, "annotate_unlabeled"},
    {Phase::AugmentUnlabeled, "augment_unlabeled"},
    {Phase::IterateUnlabeled, "iterate_unlabeled_k"},
    {Phase::Done, "done"},
}};

}  // namespace

std::string_view to_string(Phase p) noexcept {
  for (const auto& [phase, name] : kPhaseNames)
    if (phase == p) return name;
  return "?";
}

Phase phase_from_string(std::string_view name) {
  for (const auto& [phase, n] : kPhaseNames)
    if (n == name) return phase;
  throw Error(ErrorCode::MalformedLine, "unknown phase '" + std::string(name) + "'");
}

const Artifact& PhaseRecord::artifact(std::string_view name) const {
  for (const auto& a : artifacts)
    if (a.name == name) return a;
  throw Error(ErrorCode::IoError, std::string(to_string(phase)) + " has no artifact '" + std::string(name) + "'");
}

Json to_json(const PhaseRecord& r) {
  Json arts = Json::array();
  for (const auto& a : r.artifacts)
    arts.push_back({{"name", a.name}, {"path", a.path}, {"sha256", a.sha256}, {"records", a.records}});
  return Json{{"step", r.step},       {"phase", to_string(r.phase)}, {"k", r.k},         {"seed", r.seed},
              {"consumes", r.consumes}, {"artifacts", arts},           {"summary", r.summary}};
}

PhaseRecord phase_record_from_json(const Json& j) {
  PhaseRecord r;
  r.step = j.at("step").get<std::size_t>();
  r.phase = phase_from_string(j.at("phase").get<std::string>());
  r.k = j.at("k").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.consumes = j.at("consumes").get<std::vector<std::string>>();
  for (const auto& a : j.at("artifacts"))
    r.artifacts.push_back({a.at("name").get<std::string>(), a.at("path").get<std::string>(),
                           a.at("sha256").get<std::string>(), a.at("records").get<std::size_t>()});
  r.summary = j.value("summary", Json::object());
  return r;
}

Manifest::Manifest(std::string run_dir) : dir_(std::move(run_dir)) {}

std::string Manifest::file() const { return (fs::path(dir_) / kFileName).string(); }

std::string Manifest::path(const Artifact& a) const { return (fs::path(dir_) / a.path).string(); }

void Manifest::open(const Json& header, bool fresh) {
  header_ = header;
  records_.clear();
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir_ + "': " + ec.message());
  if (fresh || !fs::exists(file())) {
    std::ofstream out(file(), std::ios::trunc | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + file() + "'");
    out << header.dump() << '\n';
    return;
  }
  std::ifstream in(file(), std::ios::binary);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty manifest '" + file() + "'");
  try {
    if (Json::parse(line) != header)
      throw Error(ErrorCode::ConfigError, "'" + file() + "' belongs to a run with different inputs or settings");
    while (std::getline(in, line)) {
      if (!line.empty()) records_.push_back(phase_record_from_json(Json::parse(line)));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::IoError, "corrupt manifest '" + file() + "': " + e.what());
  }
}

void Manifest::append(const PhaseRecord& r) {
  std::ofstream out(file(), std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to '" + file() + "'");
  out << to_json(r).dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "short write to '" + file() + "'");
  records_.push_back(r);
}

Artifact Manifest::write(const std::string& name, const std::string& rel_path, const std::string& content,
                         std::size_t records) const {
  const auto full = fs::path(dir_) / rel_path;
  fs::create_directories(full.parent_path());
  {
    std::ofstream out(full, std::ios::trunc | std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + full.string() + "'");
  }
  return Artifact{name, rel_path, sha256_hex(content), records};
}

bool Manifest::verify(const PhaseRecord& r) const {
  for (const auto& a : r.artifacts) {
    if (!fs::exists(path(a)) || sha256_file(path(a)) != a.sha256) return false;
  }
  return true;
}

}  // namespace neraug
