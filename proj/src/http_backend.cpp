#include "neraug/http_backend.hpp"

#include <httplib.h>

namespace neraug {

namespace {

[[noreturn]] void fail(const std::string& what, const httplib::Result& res) {
  if (!res) throw Error(ErrorCode::BackendUnavailable, what + ": " + httplib::to_string(res.error()));
  std::string detail = "HTTP " + std::to_string(res->status);
  try {
    const auto body = Json::parse(res->body);
    detail += " " + body.value("code", std::string{}) + ": " + body.value("message", std::string{});
  } catch (const Json::exception&) {
  }
  throw Error(ErrorCode::BackendUnavailable, what + ": " + detail);
}

Json parse_body(const std::string& what, const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::BackendUnavailable, what + ": response is not JSON: " + e.what());
  }
}

}  // namespace

HttpClient::HttpClient(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

Json HttpClient::post(const std::string& path, const Json& body) const {
  httplib::Client cli(base_url_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  cli.set_write_timeout(timeout_);
  const auto res = cli.Post(path, body.dump(), "application/json");
  if (!res || res->status < 200 || res->status >= 300) fail("POST " + path, res);
  return parse_body("POST " + path, res->body);
}

Json HttpClient::get(const std::string& path) const {
  httplib::Client cli(base_url_);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  const auto res = cli.Get(path);
  if (!res || res->status < 200 || res->status >= 300) fail("GET " + path, res);
  return parse_body("GET " + path, res->body);
}

HttpBackend::HttpBackend(std::string base_url, LabelSchema schema)
    : client_(std::move(base_url)), schema_(std::move(schema)) {}

FillResponse HttpBackend::fill(const FillRequest& req) {
  const auto body = client_.post("/v1/fill", to_json(req, schema_));
  try {
    return fill_response_from_json(body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::UnparseableGeneration, "/v1/fill response: " + std::string(e.what()));
  }
}

TypeScoreResponse HttpBackend::score_types(const TypeScoreRequest& req) {
  const auto body = client_.post("/v1/score-types", to_json(req));
  try {
    return type_score_response_from_json(body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::UnparseableGeneration, "/v1/score-types response: " + std::string(e.what()));
  }
}

}  // namespace neraug
