#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bitmcts/narrative.hpp"

namespace bitmcts {

enum class Direction { Forward, Backward };

inline std::string_view to_string(Direction dir) {
  return dir == Direction::Forward ? "forward" : "backward";
}

// One proposal request to the plot-writer distribution G(.|S, dir).
struct ProposeRequest {
  Outline outline;
  Direction direction = Direction::Forward;
  int k = 4;                 // candidate budget, capped by config k_max
  std::uint64_t salt = 0;    // sampling ordinal for independent draws
  // Sampling temperature for LLM backends, in [0,2]. Negative = use the
  // profile's per-stage default.
  double temperature = -1.0;
};

// Evaluator output: ten fixed dimensions scored 1..10, total rescaled to
// [0,10] as (sum of dimensions) / 10.
struct ScoreBreakdown {
  std::map<std::string, int> per_dimension;
  double total = 0.0;

  // Canonical snake_case dimension keys, in serialization order.
  static const std::array<std::string_view, 10>& dimensions();
  // Clamps each value into [1,10] and computes the total. Missing keys are
  // the caller's parse problem; this assumes all ten are present.
  static ScoreBreakdown from_scores(std::map<std::string, int> scores);
};

// Prompt stages with their own sampling temperature.
enum class PromptStage {
  Conflict,
  Screening,
  Climax,
  ClimaxScreening,
  PlotGeneration,
  Evaluation,
  Bookends,
  Critique,
  Fiction,
  DirectOutline,
  Judge,
};

std::string_view to_string(PromptStage stage);

// Connection + sampling profile for an LLM backend.
struct ProviderProfile {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "BITMCTS_API_KEY";
  std::map<std::string, double> stage_temperatures;  // overrides over defaults
  int max_attempts = 3;
  int backoff_ms = 200;
  int timeout_s = 120;
  int max_in_flight = 4;
  std::string prompts_dir = "prompts/en";

  double temperature_for(PromptStage stage) const;
  static double default_temperature(PromptStage stage);
};

enum class ScreeningStage { Conflict, Climax };

struct Bookends {
  std::string opening;
  std::string closing;
};

// Self-critic edit script. Operations apply sequentially; each index refers
// to the event list as it stands when the operation runs.
struct EditOp {
  enum class Kind { Keep, Move, Insert, Delete };
  Kind kind = Kind::Keep;
  int index = 0;     // keep/move/delete target
  int to = 0;        // move destination
  std::string text;  // insert payload
};

std::string_view to_string(EditOp::Kind kind);

struct DirectOutlineResponse {
  std::vector<std::string> events;  // outline events, climax not included
  int climax_position = 0;          // where the given climax slots in
};

enum class FictionSegment { Beginning, Body, Ending };

std::string_view to_string(FictionSegment segment);

// Thread-safe provider call tally, keyed by operation name.
class CallCounts {
 public:
  void bump(const std::string& key, std::int64_t delta = 1);
  std::int64_t get(const std::string& key) const;
  std::map<std::string, std::int64_t> snapshot() const;
  void reset();

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::int64_t> counts_;
};

// ----------------------------------------------------------- interfaces ----

// Plot-writer distribution G(.|S, dir).
class Proposer {
 public:
  virtual ~Proposer() = default;
  // Ranked candidate list, at most req.k events, never empty texts.
  virtual std::vector<PlotEvent> propose(const ProposeRequest& req) = 0;
  // One rollout draw; `salt` decorrelates repeated draws from the same state.
  virtual PlotEvent sample_extension(const Outline& outline, Direction dir,
                                     std::uint64_t salt) = 0;
};

// Reward function R(.) over partial outlines.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual ScoreBreakdown score(const Outline& outline) = 0;
};

class Screener {
 public:
  virtual ~Screener() = default;
  // Index of the best candidate. 2..5 candidates expected; a single
  // candidate is a forced choice and must not hit the backend.
  virtual std::size_t screen(const std::vector<std::string>& candidates,
                             ScreeningStage stage) = 0;
};

// Per-dimension best (and optionally worst) picks over presented fictions.
struct Judgment {
  std::map<std::string, std::size_t> best;   // dimension -> presented index
  std::map<std::string, std::size_t> worst;  // filled only when requested
  std::string raw_response;                  // transcript for offline audit
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual Judgment judge_comparative(const std::vector<std::string>& fictions,
                                     const std::vector<std::string>& dimensions,
                                     bool include_worst) = 0;
};

// Full surface the pipeline consumes: search-facing proposer/evaluator plus
// the conflict/climax/refinement/fiction generation calls.
class StoryProvider : public Proposer, public Evaluator, public Screener {
 public:
  // Theme (and, once known, conflict) are ambient context for every
  // subsequent generation call of the run.
  virtual void set_context(const Theme& theme, const std::string& conflict_text) = 0;

  virtual std::vector<std::string> conflict_candidates(const Theme& theme, int n) = 0;
  virtual std::vector<std::string> climax_candidates(const Theme& theme,
                                                     const std::string& conflict, int n) = 0;
  virtual Bookends generate_bookends(const Outline& outline) = 0;
  virtual std::vector<EditOp> critique_outline(const Outline& outline) = 0;
  virtual std::string fiction_segment(const StagedOutline& outline, FictionSegment segment) = 0;
  virtual DirectOutlineResponse direct_outline(const std::string& conflict,
                                               const std::string& climax) = 0;

  const CallCounts& counts() const { return counts_; }
  CallCounts& counts() { return counts_; }

  // Raw response of the most recent call, kept so pipeline artifacts can
  // retain provider transcripts. Synthetic backends store their serialized
  // output here.
  const std::string& last_raw_response() const { return last_raw_; }

  // Token usage as reported by the backend, when it reports any.
  virtual std::optional<std::int64_t> tokens_reported() const { return std::nullopt; }

 protected:
  CallCounts counts_;
  std::string last_raw_;
};

// Clamp an evaluator total into [0,10]; out-of-range values are logged once
// per occurrence as warnings.
double clamp_reward(double total);

}  // namespace bitmcts
