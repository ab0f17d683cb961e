#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bitmcts/providers.hpp"
#include "json.hpp"

namespace bitmcts {

// ---------------------------------------------------------------------------
// Comparative evaluation machinery: multi-system rounds with randomized
// presentation order, per-dimension win/loss aggregation, balanced pairwise
// comparisons, and length statistics. Round transcripts retain the
// permutation and raw judge response so every table can be recomputed
// offline from the JSONL log.
// ---------------------------------------------------------------------------

// The ten judged dimensions of the win-rate tables.
const std::vector<std::string>& judge_dimensions();
// Same plus the optional thematic-expression dimension.
std::vector<std::string> judge_dimensions_with_theme();

struct ComparisonRound {
  std::string theme_id;
  std::vector<std::string> presented_systems;  // system ids in shown order
  std::uint64_t permutation_seed = 0;
  std::map<std::string, std::string> best;   // dimension -> system id
  std::map<std::string, std::string> worst;  // filled when requested
  bool valid = true;                         // false: judge failed, excluded
  std::string raw_judge_response;
};

nlohmann::json to_json(const ComparisonRound& round);
ComparisonRound comparison_round_from_json(const nlohmann::json& j);

struct WinRateTable {
  std::vector<std::string> systems;
  std::vector<std::string> dimensions;
  std::map<std::string, std::map<std::string, double>> rates;  // system -> dim -> [0,1]
  std::map<std::string, double> average;                       // system -> mean over dims
  int valid_rounds = 0;
  int invalid_rounds = 0;
};

// theme id -> system id -> fiction text.
using FictionSet = std::map<std::string, std::map<std::string, std::string>>;

// For every theme, draws `rounds` independent uniform permutations of the
// system order and judges each presentation. A judge failure invalidates
// that round only; it stays in the transcript, flagged.
std::vector<ComparisonRound> run_comparative(const FictionSet& fictions, Judge& judge,
                                             int rounds, std::uint64_t seed,
                                             const std::vector<std::string>& dimensions,
                                             bool include_worst);

enum class PickSection { Best, Worst };
enum class RoundAveraging { PerTheme, Pooled };

// Win rate = picks / valid rounds, computed per theme then averaged across
// themes (or pooled across all rounds for the pairwise protocol). Worst
// picks aggregate symmetrically into loss rates. Throws on zero valid
// rounds.
WinRateTable aggregate_win_rates(const std::vector<ComparisonRound>& rounds,
                                 const std::vector<std::string>& dimensions,
                                 PickSection section = PickSection::Best,
                                 RoundAveraging averaging = RoundAveraging::PerTheme);

struct PairwiseResult {
  std::vector<ComparisonRound> rounds;
  WinRateTable table;  // pooled over all comparisons
};

// Balanced pairwise protocol: `repetitions` comparisons per theme, exactly
// half presented (a,b) and half (b,a), sequence shuffled per theme.
// Repetitions must be even; the default of 4 gives two evaluations per
// order.
PairwiseResult run_pairwise(const std::string& system_a, const std::string& system_b,
                            const FictionSet& fictions, Judge& judge, int repetitions,
                            std::uint64_t seed, const std::vector<std::string>& dimensions);

// ------------------------------------------------------------ lengths ------

enum class LengthMode { CodePoints, WhitespaceTokens, ProviderReported };

LengthMode length_mode_from_string(std::string_view s);
std::string_view to_string(LengthMode mode);

std::size_t count_codepoints(std::string_view text);
std::size_t count_whitespace_tokens(std::string_view text);

// Mean fiction length per system under the configured counting mode. The
// provider-reported mode takes externally supplied counts.
std::map<std::string, double> length_stats(
    const std::map<std::string, std::vector<std::string>>& texts_per_system, LengthMode mode);
std::map<std::string, double> length_stats_reported(
    const std::map<std::string, std::vector<std::int64_t>>& tokens_per_system);

// ------------------------------------------------------------- reports -----

std::string win_rate_csv(const WinRateTable& table);
std::string win_rate_markdown(const WinRateTable& table);
std::string length_stats_csv(const std::map<std::string, double>& means);
std::string length_stats_markdown(const std::map<std::string, double>& means);

}  // namespace bitmcts
