#include "bitmcts/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "bitmcts/errors.hpp"
#include "bitmcts/logging.hpp"
#include "bitmcts/rng.hpp"

namespace bitmcts {

const std::vector<std::string>& judge_dimensions() {
  static const std::vector<std::string> dims = {
      "narrative_complexity", "creativity",  "emotional_resonance", "plot_structure",
      "character_development", "setting_description", "grammaticality", "fluency",
      "diversity", "overall_quality",
  };
  return dims;
}

std::vector<std::string> judge_dimensions_with_theme() {
  auto dims = judge_dimensions();
  dims.push_back("thematic_expression");
  return dims;
}

nlohmann::json to_json(const ComparisonRound& round) {
  return nlohmann::json{
      {"best", round.best},
      {"permutation_seed", round.permutation_seed},
      {"presented_systems", round.presented_systems},
      {"raw_judge_response", round.raw_judge_response},
      {"theme_id", round.theme_id},
      {"valid", round.valid},
      {"worst", round.worst},
  };
}

ComparisonRound comparison_round_from_json(const nlohmann::json& j) {
  ComparisonRound round;
  round.theme_id = j.at("theme_id").get<std::string>();
  round.presented_systems = j.at("presented_systems").get<std::vector<std::string>>();
  round.permutation_seed = j.at("permutation_seed").get<std::uint64_t>();
  round.best = j.at("best").get<std::map<std::string, std::string>>();
  round.worst = j.value("worst", std::map<std::string, std::string>{});
  round.valid = j.at("valid").get<bool>();
  round.raw_judge_response = j.value("raw_judge_response", "");
  return round;
}

namespace {

ComparisonRound judge_one_round(const std::string& theme_id,
                                const std::vector<std::string>& ordered_systems,
                                const std::vector<std::string>& ordered_texts,
                                std::uint64_t permutation_seed, Judge& judge,
                                const std::vector<std::string>& dimensions,
                                bool include_worst) {
  ComparisonRound round;
  round.theme_id = theme_id;
  round.presented_systems = ordered_systems;
  round.permutation_seed = permutation_seed;
  try {
    const Judgment judgment =
        judge.judge_comparative(ordered_texts, dimensions, include_worst);
    round.raw_judge_response = judgment.raw_response;
    for (const auto& dim : dimensions) {
      const auto it = judgment.best.find(dim);
      if (it == judgment.best.end() || it->second >= ordered_systems.size()) {
        throw ParseError("judgment lacks a usable best pick for " + dim);
      }
      round.best[dim] = ordered_systems[it->second];
      if (include_worst) {
        const auto wit = judgment.worst.find(dim);
        if (wit == judgment.worst.end() || wit->second >= ordered_systems.size()) {
          throw ParseError("judgment lacks a usable worst pick for " + dim);
        }
        round.worst[dim] = ordered_systems[wit->second];
      }
    }
  } catch (const ProviderError& e) {
    log_warn("judge round invalidated (" + theme_id + "): " + e.what());
    round.valid = false;
    round.best.clear();
    round.worst.clear();
  }
  return round;
}

}  // namespace

std::vector<ComparisonRound> run_comparative(const FictionSet& fictions, Judge& judge,
                                             int rounds, std::uint64_t seed,
                                             const std::vector<std::string>& dimensions,
                                             bool include_worst) {
  std::vector<ComparisonRound> out;
  for (const auto& [theme_id, by_system] : fictions) {
    if (by_system.size() < 2) {
      throw ConfigError("comparative evaluation needs >= 2 systems for theme " + theme_id);
    }
    std::vector<std::string> systems;
    for (const auto& [system_id, text] : by_system) systems.push_back(system_id);

    for (int r = 0; r < rounds; ++r) {
      const std::uint64_t perm_seed = HashStream()
                                          .add(seed)
                                          .add(theme_id)
                                          .add(static_cast<std::uint64_t>(r))
                                          .digest();
      const auto perm = seeded_permutation(systems.size(), perm_seed);
      std::vector<std::string> ordered_systems;
      std::vector<std::string> ordered_texts;
      for (const auto index : perm) {
        ordered_systems.push_back(systems[index]);
        ordered_texts.push_back(by_system.at(systems[index]));
      }
      out.push_back(judge_one_round(theme_id, ordered_systems, ordered_texts, perm_seed, judge,
                                    dimensions, include_worst));
    }
  }
  return out;
}

WinRateTable aggregate_win_rates(const std::vector<ComparisonRound>& rounds,
                                 const std::vector<std::string>& dimensions,
                                 PickSection section, RoundAveraging averaging) {
  WinRateTable table;
  table.dimensions = dimensions;

  std::map<std::string, std::vector<const ComparisonRound*>> by_theme;
  std::map<std::string, bool> seen_system;
  for (const auto& round : rounds) {
    if (!round.valid) {
      ++table.invalid_rounds;
      continue;
    }
    ++table.valid_rounds;
    by_theme[round.theme_id].push_back(&round);
    for (const auto& s : round.presented_systems) seen_system[s] = true;
  }
  if (table.valid_rounds == 0) {
    throw Error("no valid rounds to aggregate", exit_code::kInvariant);
  }
  for (const auto& [system, _] : seen_system) table.systems.push_back(system);

  // Pooled mode treats the whole corpus as one theme group.
  if (averaging == RoundAveraging::Pooled) {
    std::vector<const ComparisonRound*> all;
    for (const auto& [theme, list] : by_theme) {
      all.insert(all.end(), list.begin(), list.end());
    }
    by_theme.clear();
    by_theme["__pooled__"] = std::move(all);
  }

  for (const auto& system : table.systems) {
    for (const auto& dim : dimensions) {
      double sum = 0.0;
      for (const auto& [theme, list] : by_theme) {
        std::size_t picks = 0;
        for (const ComparisonRound* round : list) {
          const auto& picks_map = section == PickSection::Best ? round->best : round->worst;
          const auto it = picks_map.find(dim);
          if (it != picks_map.end() && it->second == system) ++picks;
        }
        sum += static_cast<double>(picks) / static_cast<double>(list.size());
      }
      table.rates[system][dim] = sum / static_cast<double>(by_theme.size());
    }
    double avg = 0.0;
    for (const auto& dim : dimensions) avg += table.rates[system][dim];
    table.average[system] = avg / static_cast<double>(dimensions.size());
  }
  return table;
}

PairwiseResult run_pairwise(const std::string& system_a, const std::string& system_b,
                            const FictionSet& fictions, Judge& judge, int repetitions,
                            std::uint64_t seed, const std::vector<std::string>& dimensions) {
  if (repetitions < 2 || repetitions % 2 != 0) {
    throw ConfigError("pairwise repetitions must be even to balance presentation orders");
  }
  PairwiseResult result;
  for (const auto& [theme_id, by_system] : fictions) {
    const auto a_it = by_system.find(system_a);
    const auto b_it = by_system.find(system_b);
    if (a_it == by_system.end() || b_it == by_system.end()) {
      throw ConfigError("theme " + theme_id + " lacks a fiction for one of the pair");
    }
    // Exactly repetitions/2 comparisons per order, shuffled.
    std::vector<bool> a_first(static_cast<std::size_t>(repetitions), false);
    for (int i = 0; i < repetitions / 2; ++i) a_first[static_cast<std::size_t>(i)] = true;
    const std::uint64_t shuffle_seed =
        HashStream().add(seed).add(theme_id).add("pairwise").digest();
    const auto perm = seeded_permutation(a_first.size(), shuffle_seed);

    for (std::size_t slot = 0; slot < perm.size(); ++slot) {
      const bool a_leads = a_first[perm[slot]];
      std::vector<std::string> ordered_systems =
          a_leads ? std::vector<std::string>{system_a, system_b}
                  : std::vector<std::string>{system_b, system_a};
      std::vector<std::string> ordered_texts =
          a_leads ? std::vector<std::string>{a_it->second, b_it->second}
                  : std::vector<std::string>{b_it->second, a_it->second};
      const std::uint64_t round_seed =
          HashStream().add(shuffle_seed).add(static_cast<std::uint64_t>(slot)).digest();
      result.rounds.push_back(judge_one_round(theme_id, ordered_systems, ordered_texts,
                                              round_seed, judge, dimensions, false));
    }
  }
  result.table =
      aggregate_win_rates(result.rounds, dimensions, PickSection::Best, RoundAveraging::Pooled);
  return result;
}

// ------------------------------------------------------------- lengths -----

LengthMode length_mode_from_string(std::string_view s) {
  if (s == "codepoints") return LengthMode::CodePoints;
  if (s == "whitespace-tokens") return LengthMode::WhitespaceTokens;
  if (s == "provider-reported") return LengthMode::ProviderReported;
  throw ConfigError("unknown length mode: " + std::string(s));
}

std::string_view to_string(LengthMode mode) {
  switch (mode) {
    case LengthMode::CodePoints: return "codepoints";
    case LengthMode::WhitespaceTokens: return "whitespace-tokens";
    case LengthMode::ProviderReported: return "provider-reported";
  }
  return "codepoints";
}

std::size_t count_codepoints(std::string_view text) {
  std::size_t count = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++count;  // UTF-8 continuation bytes do not start a scalar
  }
  return count;
}

std::size_t count_whitespace_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

std::map<std::string, double> length_stats(
    const std::map<std::string, std::vector<std::string>>& texts_per_system, LengthMode mode) {
  if (mode == LengthMode::ProviderReported) {
    throw ConfigError("provider-reported lengths need token counts, not texts");
  }
  std::map<std::string, double> means;
  for (const auto& [system, texts] : texts_per_system) {
    double sum = 0.0;
    for (const auto& text : texts) {
      sum += static_cast<double>(mode == LengthMode::CodePoints
                                     ? count_codepoints(text)
                                     : count_whitespace_tokens(text));
    }
    means[system] = texts.empty() ? 0.0 : sum / static_cast<double>(texts.size());
  }
  return means;
}

std::map<std::string, double> length_stats_reported(
    const std::map<std::string, std::vector<std::int64_t>>& tokens_per_system) {
  std::map<std::string, double> means;
  for (const auto& [system, tokens] : tokens_per_system) {
    double sum = 0.0;
    for (const auto t : tokens) sum += static_cast<double>(t);
    means[system] = tokens.empty() ? 0.0 : sum / static_cast<double>(tokens.size());
  }
  return means;
}

// ------------------------------------------------------------- reports -----

namespace {
std::string format_rate(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", rate);
  return buf;
}

std::string format_pct(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", rate * 100.0);
  return buf;
}
}  // namespace

std::string win_rate_csv(const WinRateTable& table) {
  std::string out = "system";
  for (const auto& dim : table.dimensions) out += "," + dim;
  out += ",average\n";
  for (const auto& system : table.systems) {
    out += system;
    for (const auto& dim : table.dimensions) {
      out += "," + format_rate(table.rates.at(system).at(dim));
    }
    out += "," + format_rate(table.average.at(system)) + "\n";
  }
  return out;
}

std::string win_rate_markdown(const WinRateTable& table) {
  std::string out = "| Method |";
  for (const auto& dim : table.dimensions) out += " " + dim + " |";
  out += " Avg |\n|---|";
  for (std::size_t i = 0; i <= table.dimensions.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& system : table.systems) {
    out += "| " + system + " |";
    for (const auto& dim : table.dimensions) {
      out += " " + format_pct(table.rates.at(system).at(dim)) + " |";
    }
    out += " " + format_pct(table.average.at(system)) + " |\n";
  }
  return out;
}

std::string length_stats_csv(const std::map<std::string, double>& means) {
  std::string out = "system,mean_length\n";
  for (const auto& [system, mean] : means) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s,%.2f\n", system.c_str(), mean);
    out += buf;
  }
  return out;
}

std::string length_stats_markdown(const std::map<std::string, double>& means) {
  std::string out = "| Method | Mean length |\n|---|---|\n";
  for (const auto& [system, mean] : means) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "| %s | %.2f |\n", system.c_str(), mean);
    out += buf;
  }
  return out;
}

}  // namespace bitmcts
