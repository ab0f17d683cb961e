#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace bitmcts {

// Digest over everything that can change a provider response. Any field
// change produces a different key; identical inputs always collide.
struct CacheKey {
  std::string digest;

  static CacheKey make(std::string_view backend_kind, std::string_view model,
                       std::string_view rendered_prompt, double temperature,
                       std::uint64_t sampling_ordinal);
};

// Content-addressed store of raw provider responses. One file per key,
// written atomically (temp file + rename), so concurrent puts of the same
// key settle on a single consistent file. Puts are idempotent.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path directory);

  std::optional<std::string> get(const CacheKey& key) const;
  void put(const CacheKey& key, std::string_view value);

  const std::filesystem::path& directory() const { return directory_; }
  std::filesystem::path path_for(const CacheKey& key) const;

 private:
  std::filesystem::path directory_;
};

}  // namespace bitmcts
