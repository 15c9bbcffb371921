#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neraug/serialize.hpp"

namespace neraug {

enum class Phase {
  TrainLm,
  Augment,
  Filter,
  TrainNer0,
  Iterate,
  AnnotateUnlabeled,
  AugmentUnlabeled,
  IterateUnlabeled,
  Done,
};

std::string_view to_string(Phase p) noexcept;
Phase phase_from_string(std::string_view name);

struct Artifact {
  std::string name;
  /// Relative to the run directory, so manifests compare across directories.
  std::string path;
  std::string sha256;
  std::size_t records = 0;
};

struct PhaseRecord {
  std::size_t step = 0;
  Phase phase = Phase::TrainLm;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> consumes;
  std::vector<Artifact> artifacts;
  Json summary = Json::object();

  const Artifact& artifact(std::string_view name) const;
};

Json to_json(const PhaseRecord& r);
PhaseRecord phase_record_from_json(const Json& j);

/// Append-only JSON-lines log of a run: one header line, then one line per
/// completed phase. Holds no timestamps, so equal runs give equal bytes.
class Manifest {
 public:
  static constexpr const char* kFileName = "manifest.jsonl";

  explicit Manifest(std::string run_dir);

  /// Opens an existing manifest whose header equals `header`, or starts a
  /// new one. A different header is a ConfigError; `fresh` discards the old
  /// run instead.
  void open(const Json& header, bool fresh = false);

  const Json& header() const noexcept { return header_; }
  const std::vector<PhaseRecord>& records() const noexcept { return records_; }
  void append(const PhaseRecord& r);

  /// Writes `content` under the run directory and returns its record.
  Artifact write(const std::string& name, const std::string& rel_path, const std::string& content,
                 std::size_t records) const;
  /// True if every artifact exists with its recorded hash.
  bool verify(const PhaseRecord& r) const;
  std::string path(const Artifact& a) const;
  std::string file() const;
  const std::string& dir() const noexcept { return dir_; }

 private:
  std::string dir_;
  Json header_;
  std::vector<PhaseRecord> records_;
};

}  // namespace neraug
