#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "bitmcts/cache.hpp"
#include "bitmcts/providers.hpp"

namespace bitmcts {

// Raw wire access to an OpenAI-compatible chat-completions endpoint. The
// process-wide operation counter is how offline mode is proven to perform
// zero network IO.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // POSTs the JSON body to <endpoint>/chat/completions and returns the raw
  // response body. Throws TransportError on connection/HTTP failure.
  virtual std::string post_chat_completions(const std::string& body) = 0;

  static std::uint64_t network_operations();

 protected:
  static void count_network_operation();
};

class HttpChatTransport final : public ChatTransport {
 public:
  // `endpoint` is a base URL ending at the API root, e.g.
  // "https://api.example.com/v1" or "http://127.0.0.1:8080/v1".
  HttpChatTransport(std::string endpoint, std::string api_key, int timeout_s);
  ~HttpChatTransport() override;

  std::string post_chat_completions(const std::string& body) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Chat-completions caller with response caching, retry/backoff, and offline
// enforcement. Raw response bodies are what the cache stores; the assistant
// message content is extracted on the way out.
class ChatClient {
 public:
  // `transport` may be null in offline mode; any miss then raises
  // CacheMissError before a connection could even be attempted.
  ChatClient(ProviderProfile profile, ResponseCache* cache, bool offline,
             std::unique_ptr<ChatTransport> transport);

  // Returns the first choice's message content. `ordinal` salts the cache
  // key for repeated independent samples of one prompt. When
  // `bypass_cache_read` is set the request is re-issued and the cache entry
  // overwritten (parse-retry path).
  std::string complete(PromptStage stage, const std::string& prompt, std::uint64_t ordinal,
                       bool bypass_cache_read = false, double temperature_override = -1.0);

  // Sum of usage.total_tokens reported by responses seen so far (cache hits
  // included); 0 when backends omit usage.
  std::int64_t tokens_reported() const { return tokens_reported_; }

  const ProviderProfile& profile() const { return profile_; }
  bool offline() const { return offline_; }

 private:
  std::string fetch_fresh(const std::string& prompt, double temperature);
  std::string extract_content(const std::string& raw_body);

  ProviderProfile profile_;
  ResponseCache* cache_;
  bool offline_;
  std::unique_ptr<ChatTransport> transport_;
  std::int64_t tokens_reported_ = 0;
};

}  // namespace bitmcts
