#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bitmcts/engine.hpp"
#include "bitmcts/providers.hpp"
#include "bitmcts/strategy.hpp"

namespace bitmcts {

// ---------------------------------------------------------------------------
// The four-stage theme-to-fiction pipeline: conflict & climax generation,
// search over plot outlines, outline refinement, segmented realization.
// Every stage persists its artifact into the run directory, and a run can
// resume from whatever the directory already holds.
// ---------------------------------------------------------------------------

struct ConflictSpec {
  Theme theme;
  std::string conflict_text;
  std::vector<std::string> candidates;  // the five generated options
  int chosen_index = 0;
  std::string raw_generation;  // provider responses kept for audit
  std::string raw_screening;
};

struct ClimaxResult {
  PlotEvent event;  // origin = climax
  std::vector<std::string> candidates;
  int chosen_index = 0;
  std::string raw_generation;
  std::string raw_screening;
};

struct FictionArtifact {
  Theme theme;
  ConflictSpec conflict;
  ClimaxResult climax;
  Outline rough_outline;
  StagedOutline refined_outline;
  std::string beginning;
  std::string body;
  std::string ending;
  std::string full_text;  // beginning + body + ending, no separators
  nlohmann::json metadata = nlohmann::json::object();
  bool complete = true;

  FictionArtifact()
      : rough_outline(Outline::root(PlotEvent{"-", "-", EventOrigin::Climax})),
        refined_outline{rough_outline, {StageLabel::Climax}} {}
};

struct PipelineOptions {
  SearchConfig forward;
  SearchConfig backward;
  StrategySpec strategy;
  bool refinement_enabled = true;  // ablation flag; off = stage_partition(rough)
  bool fiction_enabled = true;     // off = stop after refinement (outline-only runs)
  std::filesystem::path run_dir;   // empty = in-memory run, nothing persisted
  // Wall-clock stamps make byte-identical replays impossible, so they are
  // strictly opt-in and default off.
  bool record_timestamps = false;
};

// Stage 1a: five conflict candidates from one generation call, one screening
// call to pick the winner.
ConflictSpec generate_conflict(const Theme& theme, StoryProvider& provider);

// Stage 1b: five climax candidates conditioned on the conflict, screened for
// readability and conflict expression.
ClimaxResult generate_climax(const ConflictSpec& conflict, StoryProvider& provider,
                             EventIdGenerator& ids);

// Stage 3: opening/closing bookends in one call, then a self-critic edit
// script applied under climax protection. A script that references invalid
// indices or deletes the climax is rejected and step 2 skipped with a
// warning. The result is staged positionally.
StagedOutline refine_outline(const Outline& rough, StoryProvider& provider,
                             EventIdGenerator& ids);

// Sequential edit-script application (each index resolved against the list
// as it stands). Throws InvariantError on out-of-range indices or deletion
// of the climax event.
Outline apply_edit_script(const Outline& outline, const std::vector<EditOp>& ops,
                          EventIdGenerator& ids);

struct FictionSegments {
  std::string beginning;
  std::string body;
  std::string ending;
};

// Stage 4: three segment calls, each conditioned on the whole staged outline.
FictionSegments generate_fiction(const StagedOutline& refined, StoryProvider& provider);

// Full pipeline; dispatches the search stage on options.strategy.
FictionArtifact run_pipeline(const Theme& theme, const PipelineOptions& options,
                             StoryProvider& provider);

// Re-runs a persisted run directory, loading every stage artifact that is
// already on disk and executing only the missing tail. Options are
// reconstructed from run.json.
FictionArtifact resume_pipeline(const std::filesystem::path& run_dir, StoryProvider& provider);

// Screening helper: single candidate is a forced choice and never reaches
// the provider.
std::size_t screen_best(Screener& screener, const std::vector<std::string>& candidates,
                        ScreeningStage stage);

// ------------------------------------------------------------ persistence --
namespace run_files {
inline constexpr const char* kRun = "run.json";
inline constexpr const char* kConflict = "conflict.json";
inline constexpr const char* kClimax = "climax.json";
inline constexpr const char* kTreeForward = "tree_forward.json";
inline constexpr const char* kTreeBackward = "tree_backward.json";
inline constexpr const char* kRoughOutline = "rough_outline.json";
inline constexpr const char* kRefinedOutline = "refined_outline.json";
inline constexpr const char* kFiction = "fiction.md";
inline constexpr const char* kMetrics = "metrics.json";
}  // namespace run_files

nlohmann::json to_json(const SearchConfig& config);
SearchConfig search_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StrategySpec& spec);
StrategySpec strategy_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConflictSpec& spec);
ConflictSpec conflict_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClimaxResult& result);
ClimaxResult climax_result_from_json(const nlohmann::json& j);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace bitmcts
