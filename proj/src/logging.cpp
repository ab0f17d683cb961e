#include "bitmcts/logging.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace bitmcts {

namespace {
std::atomic<LogLevel> g_level{LogLevel::Info};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_mutex;

void emit(std::string_view tag, std::string_view message) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << tag << " " << message << "\n";
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void log_error(std::string_view message) { emit("[error]", message); }

void log_warn(std::string_view message) {
  g_warnings.fetch_add(1);
  if (g_level.load() >= LogLevel::Warn) emit("[warn]", message);
}

void log_info(std::string_view message) {
  if (g_level.load() >= LogLevel::Info) emit("[info]", message);
}

void log_debug(std::string_view event, const std::string& payload_json) {
  if (g_level.load() < LogLevel::Debug) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << R"({"level":"debug","event":")" << event << "\"";
  if (!payload_json.empty()) std::cerr << ",\"data\":" << payload_json;
  std::cerr << "}\n";
}

std::size_t warning_count() { return g_warnings.load(); }

}  // namespace bitmcts
