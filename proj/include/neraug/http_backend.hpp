#pragma once

#include <chrono>
#include <string>

#include "neraug/gateway.hpp"
#include "neraug/serialize.hpp"

namespace neraug {

/// JSON-over-HTTP client for the model server. Each call opens its own
/// connection, so one instance may be shared across workers.
class HttpClient {
 public:
  explicit HttpClient(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(120));

  /// Non-2xx responses and transport faults throw Error(BackendUnavailable)
  /// carrying the server's {code, message} when present.
  Json post(const std::string& path, const Json& body) const;
  Json get(const std::string& path) const;

  const std::string& base_url() const noexcept { return base_url_; }

 private:
  std::string base_url_;
  std::chrono::seconds timeout_;
};

/// Speaks POST /v1/fill and POST /v1/score-types.
class HttpBackend : public GenerationBackend {
 public:
  HttpBackend(std::string base_url, LabelSchema schema);

  FillResponse fill(const FillRequest& req) override;
  TypeScoreResponse score_types(const TypeScoreRequest& req) override;

 private:
  HttpClient client_;
  LabelSchema schema_;
};

}  // namespace neraug
