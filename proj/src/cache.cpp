#include "bitmcts/cache.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bitmcts/errors.hpp"
#include "bitmcts/sha256.hpp"

namespace bitmcts {

CacheKey CacheKey::make(std::string_view backend_kind, std::string_view model,
                        std::string_view rendered_prompt, double temperature,
                        std::uint64_t sampling_ordinal) {
  // Field separators prevent ambiguity between adjacent fields; the
  // temperature is fixed-format so 0.3 and 0.30 collide as intended.
  char temp_buf[32];
  std::snprintf(temp_buf, sizeof(temp_buf), "%.6f", temperature);
  Sha256 h;
  h.update(backend_kind);
  h.update("\x1f");
  h.update(model);
  h.update("\x1f");
  h.update(temp_buf);
  h.update("\x1f");
  h.update(std::to_string(sampling_ordinal));
  h.update("\x1f");
  h.update(rendered_prompt);
  return CacheKey{h.finish()};
}

ResponseCache::ResponseCache(std::filesystem::path directory)
    : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) {
    throw ConfigError("cannot create cache directory " + directory_.string() + ": " +
                      ec.message());
  }
}

std::filesystem::path ResponseCache::path_for(const CacheKey& key) const {
  // Two-level fanout keeps directories small under large caches.
  return directory_ / key.digest.substr(0, 2) / (key.digest + ".txt");
}

std::optional<std::string> ResponseCache::get(const CacheKey& key) const {
  const auto path = path_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw Error("cache read failed: " + path.string(), exit_code::kConfig);
  }
  return buffer.str();
}

void ResponseCache::put(const CacheKey& key, std::string_view value) {
  const auto path = path_for(key);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) {
    throw Error("cache mkdir failed: " + path.parent_path().string() + ": " + ec.message(),
                exit_code::kConfig);
  }
  // Unique temp name per writer, atomic rename into place. Losers of a race
  // overwrite with identical content addressing, so the end state is one
  // consistent file either way.
  static std::atomic<std::uint64_t> temp_counter{0};
  const auto temp = path.parent_path() /
                    (key.digest + ".tmp." + std::to_string(::getpid()) + "." +
                     std::to_string(temp_counter.fetch_add(1)));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cache write failed: " + temp.string(), exit_code::kConfig);
    out.write(value.data(), static_cast<std::streamsize>(value.size()));
    if (!out.good()) throw Error("cache write failed: " + temp.string(), exit_code::kConfig);
  }
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp);
    // A concurrent writer may have renamed first; that file carries the same
    // content-addressed payload.
    if (!std::filesystem::exists(path)) {
      throw Error("cache rename failed: " + path.string() + ": " + ec.message(),
                  exit_code::kConfig);
    }
  }
}

}  // namespace bitmcts
