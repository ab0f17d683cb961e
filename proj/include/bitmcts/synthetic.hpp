#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bitmcts/providers.hpp"

namespace bitmcts {

// Analytic reward shapes for exercising the engine offline.
enum class SyntheticEvaluatorMode {
  Hashed,           // pseudo-random but pure in (seed, outline)
  LengthMonotone,   // total = min(10, event count); +1 per extension
  LengthDecreasing, // total = max(1, 11 - event count); strictly falls until the floor
  Plateau,          // constant total
  TargetDistance,   // total = 10 - mismatch distance to a target text sequence
};

struct SyntheticOptions {
  std::uint64_t seed = 0;
  SyntheticEvaluatorMode evaluator = SyntheticEvaluatorMode::Hashed;
  int plateau_total = 5;
  std::vector<std::string> target_sequence;
  // When set, sample_extension folds an internal draw counter into the hash
  // so repeated draws from one state differ (used by best-of-N sampling).
  bool stochastic_sampling = false;
};

// Deterministic provider: every response is a pure function of (seed, call
// inputs). Two runs with the same seed are bit-identical, no I/O anywhere.
class SyntheticProvider : public StoryProvider {
 public:
  explicit SyntheticProvider(SyntheticOptions options = {});

  void set_context(const Theme& theme, const std::string& conflict_text) override;

  std::vector<PlotEvent> propose(const ProposeRequest& req) override;
  PlotEvent sample_extension(const Outline& outline, Direction dir,
                             std::uint64_t salt) override;
  ScoreBreakdown score(const Outline& outline) override;
  std::size_t screen(const std::vector<std::string>& candidates,
                     ScreeningStage stage) override;

  std::vector<std::string> conflict_candidates(const Theme& theme, int n) override;
  std::vector<std::string> climax_candidates(const Theme& theme, const std::string& conflict,
                                             int n) override;
  Bookends generate_bookends(const Outline& outline) override;
  std::vector<EditOp> critique_outline(const Outline& outline) override;
  std::string fiction_segment(const StagedOutline& outline, FictionSegment segment) override;
  DirectOutlineResponse direct_outline(const std::string& conflict,
                                       const std::string& climax) override;

  const SyntheticOptions& options() const { return options_; }

 private:
  SyntheticOptions options_;
  Theme theme_{"", "unset"};
  std::string conflict_;
  std::uint64_t draw_counter_ = 0;  // only consulted when stochastic_sampling
};

// ------------------------------------------------------- synthetic judges --

// Picks the longest fiction on every dimension; worst = shortest. Ties break
// to the lowest presented index.
class LongestWinsJudge final : public Judge {
 public:
  Judgment judge_comparative(const std::vector<std::string>& fictions,
                             const std::vector<std::string>& dimensions,
                             bool include_worst) override;
};

// Always picks presented position 0 (worst = last position). Models the
// position bias the order-balancing protocol is designed to cancel.
class PositionBiasedJudge final : public Judge {
 public:
  Judgment judge_comparative(const std::vector<std::string>& fictions,
                             const std::vector<std::string>& dimensions,
                             bool include_worst) override;
};

// Pure function of (seed, fiction texts, dimension); order-insensitive picks.
class SeededJudge final : public Judge {
 public:
  explicit SeededJudge(std::uint64_t seed) : seed_(seed) {}
  Judgment judge_comparative(const std::vector<std::string>& fictions,
                             const std::vector<std::string>& dimensions,
                             bool include_worst) override;

 private:
  std::uint64_t seed_;
};

}  // namespace bitmcts
