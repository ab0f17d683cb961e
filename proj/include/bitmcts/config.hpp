#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bitmcts/engine.hpp"
#include "bitmcts/providers.hpp"
#include "bitmcts/strategy.hpp"
#include "bitmcts/synthetic.hpp"

namespace bitmcts {

// Everything a run needs, validated before the first provider call.
// Secrets never live here: the profile names an environment variable and the
// key is read at transport construction.
struct RunConfig {
  std::vector<Theme> themes;
  std::string provider_kind = "synthetic";  // "synthetic" or "openai"
  ProviderProfile profile;
  SyntheticOptions synthetic;
  SearchConfig forward;
  SearchConfig backward;
  StrategySpec strategy;
  bool refinement_enabled = true;
  bool fiction_enabled = true;
  std::filesystem::path output_dir = "runs";
  std::filesystem::path cache_dir = "cache";
  bool offline = false;
  bool record_timestamps = false;
  int verbosity = 2;

  void validate() const;  // throws ConfigError
};

// Declarative key-value file with dotted nesting:
//
//   # run setup
//   theme.id = t1
//   theme.text = memory
//   provider.kind = synthetic
//   search.forward.iterations = 50
//
// Unknown keys are errors; typos should not pass silently.
RunConfig load_run_config(const std::filesystem::path& path);

// Applies one "key = value" assignment onto the config (shared by the file
// loader and CLI overrides).
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

// Sets every per-component seed from one master seed.
void apply_master_seed(RunConfig& config, std::uint64_t seed);

}  // namespace bitmcts
