#pragma once

#include <stdexcept>
#include <string>

namespace bitmcts {

// Process exit codes used by the CLI. Library errors carry the code they
// map to so the CLI can translate without a taxonomy switch.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 2;
inline constexpr int kProvider = 3;
inline constexpr int kCacheMissOffline = 4;
inline constexpr int kInvariant = 5;
}  // namespace exit_code

class Error : public std::runtime_error {
 public:
  Error(std::string message, int code)
      : std::runtime_error(std::move(message)), exit_code_(code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::string message)
      : Error(std::move(message), exit_code::kConfig) {}
};

// Provider failures: transport trouble, malformed responses, exhausted
// retries. `retryable` distinguishes transient faults from hard ones.
class ProviderError : public Error {
 public:
  explicit ProviderError(std::string message, bool retryable = false)
      : Error(std::move(message), exit_code::kProvider), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class ParseError : public ProviderError {
 public:
  explicit ParseError(std::string message) : ProviderError(std::move(message), true) {}
};

class TransportError : public ProviderError {
 public:
  explicit TransportError(std::string message) : ProviderError(std::move(message), true) {}
};

class CacheMissError : public Error {
 public:
  explicit CacheMissError(std::string message)
      : Error(std::move(message), exit_code::kCacheMissOffline) {}
};

// Broken preconditions and contract violations (e.g. UCB on an unvisited
// node, duplicate event ids in one outline).
class InvariantError : public Error {
 public:
  explicit InvariantError(std::string message)
      : Error(std::move(message), exit_code::kInvariant) {}
};

}  // namespace bitmcts
