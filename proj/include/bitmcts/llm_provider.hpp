#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "bitmcts/chat_client.hpp"
#include "bitmcts/providers.hpp"

namespace bitmcts {

// StoryProvider backed by an OpenAI-compatible endpoint. Prompts come from
// template files ({theme}/{conflict}/{outline}/... placeholders) so the
// Chinese originals and the English translations ship side by side; pick a
// set with ProviderProfile::prompts_dir.
class LlmProvider final : public StoryProvider {
 public:
  LlmProvider(ProviderProfile profile, ResponseCache* cache, bool offline,
              std::uint64_t id_seed,
              std::unique_ptr<ChatTransport> transport_override = nullptr);

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

  ChatClient& client() { return client_; }

  std::optional<std::int64_t> tokens_reported() const override {
    return client_.tokens_reported();
  }

  // Numbered event list as prompts see it; the climax line is marked.
  static std::string outline_for_prompt(const Outline& outline);
  static std::string staged_outline_for_prompt(const StagedOutline& staged);
  static std::string numbered_candidates(const std::vector<std::string>& candidates);

 private:
  std::string load_template(const std::string& name);
  // Runs complete + parse with parse-retries: a failed parse re-requests
  // (bypassing the cache) up to the profile's attempt budget.
  template <typename Parser>
  auto complete_parsed(PromptStage stage, const std::string& prompt, std::uint64_t ordinal,
                       Parser&& parser, double temperature_override = -1.0);

  ChatClient client_;
  std::filesystem::path prompts_dir_;
  std::map<std::string, std::string> template_cache_;
  EventIdGenerator id_gen_;
  Theme theme_{"", "unset"};
  std::string conflict_;
};

// LLM comparative judge sharing the client/caching machinery.
class LlmJudge final : public Judge {
 public:
  LlmJudge(ProviderProfile profile, ResponseCache* cache, bool offline,
           std::unique_ptr<ChatTransport> transport_override = nullptr);

  Judgment judge_comparative(const std::vector<std::string>& fictions,
                             const std::vector<std::string>& dimensions,
                             bool include_worst) override;

 private:
  ChatClient client_;
  std::filesystem::path prompts_dir_;
  std::string template_text_;
};

}  // namespace bitmcts
