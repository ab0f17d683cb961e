#include "bitmcts/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "bitmcts/errors.hpp"

namespace bitmcts {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

int to_int(const std::string& key, const std::string& value) {
  try {
    return std::stoi(value);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " needs an integer, got '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return std::stod(value);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " needs a number, got '" + value + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " needs an unsigned integer, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key " + key + " needs a boolean, got '" + value + "'");
}

void apply_search_entry(SearchConfig& config, const std::string& key, const std::string& field,
                        const std::string& value) {
  if (field == "exploration_c") {
    config.exploration_c = to_double(key, value);
  } else if (field == "iterations") {
    config.iterations = to_int(key, value);
  } else if (field == "d_max") {
    config.d_max = to_int(key, value);
  } else if (field == "s_max") {
    config.s_max = to_int(key, value);
  } else if (field == "k_max") {
    config.k_max = to_int(key, value);
  } else if (field == "seed") {
    config.seed = to_u64(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

SyntheticEvaluatorMode evaluator_mode_from_string(const std::string& key,
                                                  const std::string& value) {
  if (value == "hashed") return SyntheticEvaluatorMode::Hashed;
  if (value == "length-monotone") return SyntheticEvaluatorMode::LengthMonotone;
  if (value == "length-decreasing") return SyntheticEvaluatorMode::LengthDecreasing;
  if (value == "plateau") return SyntheticEvaluatorMode::Plateau;
  if (value == "target-distance") return SyntheticEvaluatorMode::TargetDistance;
  throw ConfigError("config key " + key + " has unknown evaluator mode '" + value + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (provider_kind != "synthetic" && provider_kind != "openai") {
    throw ConfigError("provider.kind must be synthetic or openai, got " + provider_kind);
  }
  for (const auto& theme : themes) {
    if (trim(theme.text).empty()) throw ConfigError("theme text must be non-empty");
  }
  if (forward.iterations < 1 || backward.iterations < 1) {
    throw ConfigError("search iterations must be positive");
  }
  if (forward.d_max < 1 || forward.s_max < 1 || forward.k_max < 1 || backward.d_max < 1 ||
      backward.s_max < 1 || backward.k_max < 1) {
    throw ConfigError("search depth/simulation/candidate budgets must be positive");
  }
  if (forward.exploration_c <= 0.0 || backward.exploration_c <= 0.0) {
    throw ConfigError("exploration constant must be > 0");
  }
  strategy.validate();
}

void apply_config_entry(RunConfig& config, const std::string& raw_key,
                        const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);

  // theme.id/theme.text address a single theme; theme.<n>.id/.text a batch.
  const auto indexed_theme = [&](const std::string& suffix) -> Theme* {
    if (key.rfind("theme.", 0) != 0) return nullptr;
    const std::string rest = key.substr(6);
    const auto dot = rest.find('.');
    if (dot == std::string::npos || rest.substr(dot + 1) != suffix) return nullptr;
    const std::string index_text = rest.substr(0, dot);
    if (index_text.empty() ||
        !std::all_of(index_text.begin(), index_text.end(),
                     [](unsigned char c) { return std::isdigit(c); })) {
      return nullptr;
    }
    const std::size_t index = std::stoul(index_text);
    if (index >= config.themes.size()) config.themes.resize(index + 1);
    return &config.themes[index];
  };

  if (key == "theme.id") {
    if (config.themes.empty()) config.themes.push_back(Theme{});
    config.themes.back().id = value;
  } else if (key == "theme.text") {
    if (config.themes.empty()) config.themes.push_back(Theme{});
    config.themes.back().text = value;
  } else if (Theme* theme = indexed_theme("id")) {
    theme->id = value;
  } else if (Theme* theme = indexed_theme("text")) {
    theme->text = value;
  } else if (key == "provider.kind") {
    config.provider_kind = value;
  } else if (key == "provider.endpoint") {
    config.profile.endpoint = value;
  } else if (key == "provider.model") {
    config.profile.model = value;
  } else if (key == "provider.api_key_env") {
    config.profile.api_key_env = value;
  } else if (key == "provider.max_attempts") {
    config.profile.max_attempts = to_int(key, value);
  } else if (key == "provider.backoff_ms") {
    config.profile.backoff_ms = to_int(key, value);
  } else if (key == "provider.timeout_s") {
    config.profile.timeout_s = to_int(key, value);
  } else if (key == "provider.max_in_flight") {
    config.profile.max_in_flight = to_int(key, value);
  } else if (key == "provider.prompts_dir") {
    config.profile.prompts_dir = value;
  } else if (key.rfind("provider.temperature.", 0) == 0) {
    config.profile.stage_temperatures[key.substr(21)] = to_double(key, value);
  } else if (key == "synthetic.seed") {
    config.synthetic.seed = to_u64(key, value);
  } else if (key == "synthetic.evaluator") {
    config.synthetic.evaluator = evaluator_mode_from_string(key, value);
  } else if (key == "synthetic.plateau_total") {
    config.synthetic.plateau_total = to_int(key, value);
  } else if (key == "synthetic.stochastic_sampling") {
    config.synthetic.stochastic_sampling = to_bool(key, value);
  } else if (key.rfind("search.forward.", 0) == 0) {
    apply_search_entry(config.forward, key, key.substr(15), value);
  } else if (key.rfind("search.backward.", 0) == 0) {
    apply_search_entry(config.backward, key, key.substr(16), value);
  } else if (key == "strategy.kind") {
    config.strategy.kind = strategy_kind_from_string(value);
  } else if (key == "strategy.beam_width") {
    config.strategy.beam_width = to_int(key, value);
  } else if (key == "strategy.best_of_n") {
    config.strategy.best_of_n = to_int(key, value);
  } else if (key == "strategy.depth") {
    config.strategy.depth = to_int(key, value);
  } else if (key == "pipeline.refinement") {
    config.refinement_enabled = to_bool(key, value);
  } else if (key == "pipeline.fiction") {
    config.fiction_enabled = to_bool(key, value);
  } else if (key == "pipeline.record_timestamps") {
    config.record_timestamps = to_bool(key, value);
  } else if (key == "output_dir") {
    config.output_dir = value;
  } else if (key == "cache_dir") {
    config.cache_dir = value;
  } else if (key == "offline") {
    config.offline = to_bool(key, value);
  } else if (key == "verbosity") {
    config.verbosity = to_int(key, value);
  } else if (key == "seed") {
    apply_master_seed(config, to_u64(key, value));
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

void apply_master_seed(RunConfig& config, std::uint64_t seed) {
  config.forward.seed = seed;
  config.backward.seed = seed;
  config.synthetic.seed = seed;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Inline comments: a '#' preceded by whitespace starts a comment.
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' &&
          (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.erase(i);
        break;
      }
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not 'key = value': " + stripped);
    }
    apply_config_entry(config, stripped.substr(0, eq), stripped.substr(eq + 1));
  }
  return config;
}

}  // namespace bitmcts
