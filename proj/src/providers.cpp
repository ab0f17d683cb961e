#include "bitmcts/providers.hpp"

#include <algorithm>

#include "bitmcts/logging.hpp"

namespace bitmcts {

const std::array<std::string_view, 10>& ScoreBreakdown::dimensions() {
  static const std::array<std::string_view, 10> dims = {
      "character_development", "setting",     "consistency", "relatedness",
      "causal_temporal",       "theme",       "readability", "creativity",
      "major_flaws",           "overall_quality",
  };
  return dims;
}

ScoreBreakdown ScoreBreakdown::from_scores(std::map<std::string, int> scores) {
  ScoreBreakdown out;
  int sum = 0;
  for (auto dim : dimensions()) {
    int v = scores[std::string(dim)];
    if (v < 1 || v > 10) {
      log_warn("score for '" + std::string(dim) + "' out of [1,10], clamping: " +
               std::to_string(v));
      v = std::clamp(v, 1, 10);
    }
    out.per_dimension[std::string(dim)] = v;
    sum += v;
  }
  out.total = static_cast<double>(sum) / 10.0;
  return out;
}

std::string_view to_string(PromptStage stage) {
  switch (stage) {
    case PromptStage::Conflict: return "conflict";
    case PromptStage::Screening: return "screening";
    case PromptStage::Climax: return "climax";
    case PromptStage::ClimaxScreening: return "climax_screening";
    case PromptStage::PlotGeneration: return "plot_generation";
    case PromptStage::Evaluation: return "evaluation";
    case PromptStage::Bookends: return "bookends";
    case PromptStage::Critique: return "critique";
    case PromptStage::Fiction: return "fiction";
    case PromptStage::DirectOutline: return "direct_outline";
    case PromptStage::Judge: return "judge";
  }
  return "plot_generation";
}

double ProviderProfile::default_temperature(PromptStage stage) {
  switch (stage) {
    case PromptStage::Conflict: return 0.4;
    case PromptStage::Screening: return 0.3;
    case PromptStage::Climax: return 0.4;
    case PromptStage::ClimaxScreening: return 0.3;
    case PromptStage::PlotGeneration: return 0.3;
    case PromptStage::Evaluation: return 0.0;
    case PromptStage::Bookends: return 0.4;
    case PromptStage::Critique: return 0.3;
    case PromptStage::Fiction: return 0.7;
    case PromptStage::DirectOutline: return 0.3;
    case PromptStage::Judge: return 0.0;
  }
  return 0.3;
}

double ProviderProfile::temperature_for(PromptStage stage) const {
  auto it = stage_temperatures.find(std::string(to_string(stage)));
  if (it != stage_temperatures.end()) return it->second;
  return default_temperature(stage);
}

std::string_view to_string(EditOp::Kind kind) {
  switch (kind) {
    case EditOp::Kind::Keep: return "keep";
    case EditOp::Kind::Move: return "move";
    case EditOp::Kind::Insert: return "insert";
    case EditOp::Kind::Delete: return "delete";
  }
  return "keep";
}

std::string_view to_string(FictionSegment segment) {
  switch (segment) {
    case FictionSegment::Beginning: return "beginning";
    case FictionSegment::Body: return "body";
    case FictionSegment::Ending: return "ending";
  }
  return "body";
}

void CallCounts::bump(const std::string& key, std::int64_t delta) {
  std::lock_guard<std::mutex> lock(mutex_);
  counts_[key] += delta;
}

std::int64_t CallCounts::get(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

std::map<std::string, std::int64_t> CallCounts::snapshot() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return counts_;
}

void CallCounts::reset() {
  std::lock_guard<std::mutex> lock(mutex_);
  counts_.clear();
}

double clamp_reward(double total) {
  if (total < 0.0) {
    log_warn("evaluator total below range, clamping to 0: " + std::to_string(total));
    return 0.0;
  }
  if (total > 10.0) {
    log_warn("evaluator total above range, clamping to 10: " + std::to_string(total));
    return 10.0;
  }
  return total;
}

}  // namespace bitmcts
