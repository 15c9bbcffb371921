#include "neraug/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace neraug {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::ConfigError, key + " = '" + value + "': " + why);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "not a number");
  return out;
}

// from_chars for double is missing from older libstdc++ releases.
double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value, "not a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, value, "not a number");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number<T>(key, item));
  if (out.empty()) bad_value(key, value, "empty list");
  return out;
}

std::string resolve(const std::string& base_dir, const std::string& value) {
  if (value.empty() || base_dir.empty() || fs::path(value).is_absolute()) return value;
  return (fs::path(base_dir) / value).lexically_normal().string();
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "," : "") << xs[i];
  return out.str();
}

std::string real(double d) {
  std::ostringstream out;
  out.precision(17);
  out << d;
  return out.str();
}

}  // namespace

std::string_view to_string(BackendKind b) noexcept { return b == BackendKind::Mock ? "mock" : "http"; }

BackendKind backend_from_string(std::string_view name) {
  if (name == "mock") return BackendKind::Mock;
  if (name == "http") return BackendKind::Http;
  throw Error(ErrorCode::ConfigError, "unknown backend '" + std::string(name) + "'");
}

void RunConfig::set(const std::string& key, const std::string& raw, const std::string& base_dir) {
  const auto value = trim(raw);
  using Setter = std::function<void()>;
  const std::map<std::string, Setter> setters{
      {"train", [&] { train_path = resolve(base_dir, value); }},
      {"unlabeled", [&] { unlabeled_path = resolve(base_dir, value); }},
      {"test", [&] { test_path = resolve(base_dir, value); }},
      {"schema", [&] { schema_path = resolve(base_dir, value); }},
      {"shots", [&] { shots = parse_number<std::size_t>(key, value); }},
      {"strategy",
       [&] {
         strategies.clear();
         for (const auto& s : split_list(value)) {
           if (s == "all") {
             strategies.assign(std::begin(kAllStrategies), std::end(kAllStrategies));
           } else {
             strategies.push_back(strategy_from_string(s));
           }
         }
         if (strategies.empty()) bad_value(key, value, "no strategy");
       }},
      {"multiplier", [&] { multiplier = parse_number<std::size_t>(key, value); }},
      {"K", [&] { strategy.flips = parse_number<std::size_t>(key, value); }},
      {"M_choices", [&] { strategy.entity_aug_choices = parse_list<std::size_t>(key, value); }},
      {"N_choices", [&] { strategy.context_aug_choices = parse_list<std::size_t>(key, value); }},
      {"flip_scheme", [&] { flip.kind = flip_kind_from_string(value); }},
      {"flip_metric", [&] { flip.metric = metric_from_string(value); }},
      {"flip_direction", [&] { flip.direction = direction_from_string(value); }},
      {"flip_temperature", [&] { flip.temperature = parse_real(key, value); }},
      {"context_mask_min", [&] { ops.context_mask_min = parse_number<std::size_t>(key, value); }},
      {"context_mask_max", [&] { ops.context_mask_max = parse_number<std::size_t>(key, value); }},
      {"placeholder", [&] { ops.placeholder = value; }},
      {"max_new_tokens", [&] { decode.max_new_tokens = parse_number<std::size_t>(key, value); }},
      {"decode_temperature", [&] { decode.temperature = parse_real(key, value); }},
      {"query_mode",
       [&] {
         if (value == "joint") {
           query_mode = QueryMode::Joint;
         } else if (value == "one-at-a-time") {
           query_mode = QueryMode::OneAtATime;
         } else {
           bad_value(key, value, "expected joint or one-at-a-time");
         }
       }},
      {"mixup_alpha", [&] { mixup.alpha = parse_real(key, value); }},
      {"mixup_beta", [&] { mixup.beta = parse_real(key, value); }},
      {"mixup_layers", [&] { mixup.layers = parse_list<int>(key, value); }},
      {"mixup_align", [&] { mixup_align = align_mode_from_string(value); }},
      {"tau", [&] { tau = parse_real(key, value); }},
      {"iterations", [&] { iterations = parse_number<std::size_t>(key, value); }},
      {"confidence", [&] { confidence = confidence_policy_from_string(value); }},
      {"filter_reannotated", [&] { filter_reannotated = parse_bool(key, value); }},
      {"seed", [&] { seed = parse_number<std::uint64_t>(key, value); }},
      {"backend", [&] { backend = backend_from_string(value); }},
      {"backend_url", [&] { backend_url = value; }},
      {"trainer_url", [&] { trainer_url = value; }},
      {"max_in_flight", [&] { max_in_flight = parse_number<std::size_t>(key, value); }},
      {"retries", [&] { retry.retries = parse_number<std::size_t>(key, value); }},
      {"retry_base_ms", [&] { retry.base_delay = std::chrono::milliseconds(parse_number<long>(key, value)); }},
      {"timeout_s", [&] { timeout = std::chrono::seconds(parse_number<long>(key, value)); }},
      {"out", [&] { out_dir = resolve(base_dir, value); }},
  };
  if (key.rfind("lexicon.", 0) == 0 && key.size() > 8) {
    lexicons[normalize_name(key.substr(8))] = resolve(base_dir, value);
    return;
  }
  const auto it = setters.find(key);
  if (it == setters.end()) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  it->second();
}

void RunConfig::validate() const {
  if (train_path.empty()) throw Error(ErrorCode::ConfigError, "train is required");
  if (schema_path.empty()) throw Error(ErrorCode::ConfigError, "schema is required");
  for (const auto& p : {train_path, unlabeled_path, test_path, schema_path}) {
    if (!p.empty() && !fs::exists(p)) throw Error(ErrorCode::ConfigError, "no such file '" + p + "'");
  }
  for (const auto& [name, p] : lexicons) {
    if (!fs::exists(p)) throw Error(ErrorCode::ConfigError, "lexicon." + name + ": no such file '" + p + "'");
  }
  if (multiplier == 0) throw Error(ErrorCode::ConfigError, "multiplier must be at least 1");
  if (iterations == 0) throw Error(ErrorCode::ConfigError, "iterations must be at least 1");
  if (!(tau > 0 && tau <= 1)) throw Error(ErrorCode::ConfigError, "tau must lie in (0, 1]");
  if (max_in_flight == 0) throw Error(ErrorCode::ConfigError, "max_in_flight must be at least 1");
  strategy.validate();
  ops.validate();
  mixup.validate();
  if (flip.temperature <= 0) throw Error(ErrorCode::ConfigError, "flip_temperature must be positive");
}

AugmentConfig RunConfig::augment_config(std::uint64_t s) const {
  AugmentConfig a;
  a.strategies = strategies;
  a.multiplier = multiplier;
  a.strategy = strategy;
  a.flip = flip;
  a.ops = ops;
  a.decode = decode;
  a.seed = s;
  a.max_in_flight = max_in_flight;
  a.retry = retry;
  return a;
}

FilterOptions RunConfig::filter_options() const {
  return FilterOptions{query_mode, ops.placeholder, max_in_flight, retry};
}

std::string RunConfig::canonical() const {
  std::vector<std::string> strategy_names;
  for (auto s : strategies) strategy_names.emplace_back(to_string(s));
  std::ostringstream out;
  // Paths, endpoints and concurrency are left out: they do not change results.
  out << "shots = " << shots << '\n'
      << "strategy = " << join(strategy_names) << '\n'
      << "multiplier = " << multiplier << '\n'
      << "K = " << strategy.flips << '\n'
      << "M_choices = " << join(strategy.entity_aug_choices) << '\n'
      << "N_choices = " << join(strategy.context_aug_choices) << '\n'
      << "flip_scheme = " << to_string(flip.kind) << '\n'
      << "flip_metric = " << to_string(flip.metric) << '\n'
      << "flip_direction = " << to_string(flip.direction) << '\n'
      << "flip_temperature = " << real(flip.temperature) << '\n'
      << "context_mask_min = " << ops.context_mask_min << '\n'
      << "context_mask_max = " << ops.context_mask_max << '\n'
      << "placeholder = " << ops.placeholder << '\n'
      << "max_new_tokens = " << decode.max_new_tokens << '\n'
      << "decode_temperature = " << real(decode.temperature) << '\n'
      << "query_mode = " << (query_mode == QueryMode::Joint ? "joint" : "one-at-a-time") << '\n'
      << "mixup_alpha = " << real(mixup.alpha) << '\n'
      << "mixup_beta = " << real(mixup.beta) << '\n'
      << "mixup_layers = " << join(mixup.layers) << '\n'
      << "mixup_align = " << to_string(mixup_align) << '\n'
      << "tau = " << real(tau) << '\n'
      << "iterations = " << iterations << '\n'
      << "confidence = " << to_string(confidence) << '\n'
      << "filter_reannotated = " << (filter_reannotated ? "true" : "false") << '\n'
      << "seed = " << seed << '\n'
      << "backend = " << to_string(backend) << '\n';
  return out.str();
}

RunConfig parse_config(std::istream& in, const std::string& base_dir) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    try {
      cfg.set(trim(text.substr(0, eq)), text.substr(eq + 1), base_dir);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
  return parse_config(in, fs::path(path).parent_path().string());
}

}  // namespace neraug
