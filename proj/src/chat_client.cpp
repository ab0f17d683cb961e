#include "bitmcts/chat_client.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "bitmcts/errors.hpp"
#include "bitmcts/logging.hpp"
#include "bitmcts/text_parse.hpp"
#include "httplib.h"
#include "json.hpp"

namespace bitmcts {

namespace {
std::atomic<std::uint64_t> g_network_operations{0};
}

std::uint64_t ChatTransport::network_operations() { return g_network_operations.load(); }
void ChatTransport::count_network_operation() { g_network_operations.fetch_add(1); }

struct HttpChatTransport::Impl {
  std::string base;        // scheme://authority
  std::string path_prefix; // e.g. /v1
  std::string api_key;
  int timeout_s;
};

HttpChatTransport::HttpChatTransport(std::string endpoint, std::string api_key, int timeout_s)
    : impl_(std::make_unique<Impl>()) {
  while (!endpoint.empty() && endpoint.back() == '/') endpoint.pop_back();
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must include a scheme: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    impl_->base = endpoint;
  } else {
    impl_->base = endpoint.substr(0, path_start);
    impl_->path_prefix = endpoint.substr(path_start);
  }
  impl_->api_key = std::move(api_key);
  impl_->timeout_s = timeout_s;
}

HttpChatTransport::~HttpChatTransport() = default;

std::string HttpChatTransport::post_chat_completions(const std::string& body) {
  count_network_operation();
  httplib::Client client(impl_->base);
  client.set_connection_timeout(impl_->timeout_s, 0);
  client.set_read_timeout(impl_->timeout_s, 0);
  httplib::Headers headers;
  if (!impl_->api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + impl_->api_key);
  }
  const std::string path = impl_->path_prefix + "/chat/completions";
  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw TransportError("connection to " + impl_->base + " failed: " +
                         httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("chat completions returned HTTP " + std::to_string(res->status) +
                         ": " + res->body.substr(0, 200));
  }
  return res->body;
}

ChatClient::ChatClient(ProviderProfile profile, ResponseCache* cache, bool offline,
                       std::unique_ptr<ChatTransport> transport)
    : profile_(std::move(profile)),
      cache_(cache),
      offline_(offline),
      transport_(std::move(transport)) {}

std::string ChatClient::fetch_fresh(const std::string& prompt, double temperature) {
  if (transport_ == nullptr) {
    throw TransportError("no transport configured for live requests");
  }
  const nlohmann::json body = {
      {"model", profile_.model},
      {"messages", {{{"role", "user"}, {"content", prompt}}}},
      {"temperature", temperature},
  };
  const std::string body_str = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, profile_.max_attempts); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(profile_.backoff_ms * attempt));
    }
    try {
      // The API key never enters the log stream; only prompt/response do.
      log_debug("chat_request", nlohmann::json({{"model", profile_.model},
                                                {"temperature", temperature},
                                                {"bytes", body_str.size()}})
                                    .dump());
      std::string raw = transport_->post_chat_completions(body_str);
      log_debug("chat_response", nlohmann::json({{"bytes", raw.size()}}).dump());
      return raw;
    } catch (const TransportError& e) {
      last_error = e.what();
      log_warn(std::string("transport attempt failed: ") + e.what());
    }
  }
  throw TransportError("chat completions failed after " +
                       std::to_string(profile_.max_attempts) + " attempts: " + last_error);
}

std::string ChatClient::extract_content(const std::string& raw_body) {
  auto parsed = nlohmann::json::parse(raw_body, nullptr, false);
  if (parsed.is_discarded()) {
    throw ParseError("chat completions body is not valid JSON");
  }
  if (parsed.contains("usage") && parsed["usage"].is_object()) {
    tokens_reported_ += parsed["usage"].value("total_tokens", 0);
  }
  const auto choices = parsed.find("choices");
  if (choices == parsed.end() || !choices->is_array() || choices->empty()) {
    throw ParseError("chat completions body has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw ParseError("chat completions choice has no message content");
  }
  return first["message"]["content"].get<std::string>();
}

std::string ChatClient::complete(PromptStage stage, const std::string& prompt,
                                 std::uint64_t ordinal, bool bypass_cache_read,
                                 double temperature_override) {
  if (temperature_override > 2.0) {
    throw ConfigError("sampling temperature must lie in [0,2]");
  }
  const double temperature =
      temperature_override >= 0.0 ? temperature_override : profile_.temperature_for(stage);
  const CacheKey key = CacheKey::make("openai", profile_.model, prompt, temperature, ordinal);
  if (cache_ != nullptr && !bypass_cache_read) {
    if (auto hit = cache_->get(key)) {
      return extract_content(*hit);
    }
  }
  if (offline_) {
    throw CacheMissError("offline mode: no cached response for stage " +
                         std::string(to_string(stage)) + " (key " + key.digest.substr(0, 12) +
                         ")");
  }
  const std::string raw = fetch_fresh(prompt, temperature);
  // Content must extract before the response is worth caching.
  std::string content = extract_content(raw);
  if (cache_ != nullptr) cache_->put(key, raw);
  return content;
}

}  // namespace bitmcts
