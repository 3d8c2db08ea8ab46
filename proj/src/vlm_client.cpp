#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <openssl/evp.h>

#include "json.hpp"
#include "panav/selection.hpp"

namespace panav {

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorCode::kInvalidConfig, "endpoint needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

ChatCompletionClient::ChatCompletionClient(ChatCompletionConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) fail(ErrorCode::kInvalidConfig, "vlm.endpoint is not set");
  split_url(config_.endpoint);
}

std::string ChatCompletionClient::request_body(const VlmRequest& request) {
  using nlohmann::json;
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.user_text}});
  for (const auto& image : request.images) {
    content.push_back({{"type", "text"}, {"text", image.label}});
    content.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:image/png;base64," + base64_encode(image.png)}}}});
  }
  json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["messages"] = json::array({
      {{"role", "system"}, {"content", request.system_text}},
      {{"role", "user"}, {"content", std::move(content)}},
  });
  return body.dump();
}

std::string ChatCompletionClient::response_text(std::string_view body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::kTransport, "response is not JSON");
  const auto* choices = doc.contains("choices") ? &doc["choices"] : nullptr;
  if (!choices || !choices->is_array() || choices->empty()) {
    fail(ErrorCode::kTransport, "response has no choices");
  }
  const auto& message = (*choices)[0].value("message", nlohmann::json::object());
  const auto it = message.find("content");
  if (it == message.end() || !it->is_string()) fail(ErrorCode::kTransport, "response has no message text");
  return it->get<std::string>();
}

std::string ChatCompletionClient::complete(const VlmRequest& request) {
  VlmRequest req = request;
  if (req.model.empty()) req.model = config_.model;
  const auto [base, path] = split_url(config_.endpoint);
  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  client.set_write_timeout(config_.timeout_seconds);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto res = client.Post(path, headers, request_body(req), "application/json");
  if (!res) fail(ErrorCode::kTransport, "request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) {
    fail(ErrorCode::kUnauthorized, "endpoint rejected the credential (HTTP " + std::to_string(res->status) + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    fail(ErrorCode::kTransport, "HTTP " + std::to_string(res->status));
  }
  return response_text(res->body);
}

}  // namespace panav
