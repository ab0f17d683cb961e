#pragma once

#include <string>
#include <string_view>

namespace bitmcts {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Process-wide verbosity. Info prints human-readable progress lines; Debug
// additionally prints structured JSON records (one object per line).
void set_log_level(LogLevel level);
LogLevel log_level();

void log_error(std::string_view message);
void log_warn(std::string_view message);
void log_info(std::string_view message);
// `payload_json` must already be a serialized JSON object (or empty).
void log_debug(std::string_view event, const std::string& payload_json = {});

// Warnings emitted since process start; tests use this to assert that soft
// fallbacks (clamping, screening fallback, partial rollouts) were logged.
std::size_t warning_count();

}  // namespace bitmcts
