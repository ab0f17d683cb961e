#include "bitmcts/llm_provider.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bitmcts/errors.hpp"
#include "bitmcts/logging.hpp"
#include "bitmcts/text_parse.hpp"

namespace bitmcts {

namespace {

std::string read_api_key(const ProviderProfile& profile) {
  const char* value = std::getenv(profile.api_key_env.c_str());
  return value == nullptr ? std::string() : std::string(value);
}

std::unique_ptr<ChatTransport> make_transport(const ProviderProfile& profile, bool offline,
                                              std::unique_ptr<ChatTransport> override_t) {
  if (override_t) return override_t;
  if (offline) return nullptr;  // offline mode never owns a way onto the network
  return std::make_unique<HttpChatTransport>(profile.endpoint, read_api_key(profile),
                                             profile.timeout_s);
}

std::string segment_template_name(FictionSegment segment) {
  switch (segment) {
    case FictionSegment::Beginning: return "fiction_beginning";
    case FictionSegment::Body: return "fiction_body";
    case FictionSegment::Ending: return "fiction_ending";
  }
  return "fiction_body";
}

}  // namespace

LlmProvider::LlmProvider(ProviderProfile profile, ResponseCache* cache, bool offline,
                         std::uint64_t id_seed,
                         std::unique_ptr<ChatTransport> transport_override)
    : client_(profile, cache, offline,
              make_transport(profile, offline, std::move(transport_override))),
      prompts_dir_(profile.prompts_dir),
      id_gen_(id_seed) {}

void LlmProvider::set_context(const Theme& theme, const std::string& conflict_text) {
  theme_ = theme;
  conflict_ = conflict_text;
}

std::string LlmProvider::load_template(const std::string& name) {
  const auto cached = template_cache_.find(name);
  if (cached != template_cache_.end()) return cached->second;
  const auto path = prompts_dir_ / (name + ".txt");
  std::ifstream in(path);
  if (!in) throw ConfigError("prompt template not found: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  template_cache_[name] = buffer.str();
  return template_cache_[name];
}

std::string LlmProvider::outline_for_prompt(const Outline& outline) {
  std::ostringstream out;
  for (std::size_t i = 0; i < outline.events().size(); ++i) {
    out << (i + 1) << ". ";
    if (i == outline.climax_index()) out << "[climax] ";
    out << outline.events()[i].text << "\n";
  }
  return out.str();
}

std::string LlmProvider::staged_outline_for_prompt(const StagedOutline& staged) {
  std::ostringstream out;
  const auto& events = staged.outline.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    out << (i + 1) << ". [" << to_string(staged.stage_labels[i]) << "] " << events[i].text
        << "\n";
  }
  return out.str();
}

std::string LlmProvider::numbered_candidates(const std::vector<std::string>& candidates) {
  std::ostringstream out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out << "plot" << (i + 1) << ": " << candidates[i] << "\n";
  }
  return out.str();
}

template <typename Parser>
auto LlmProvider::complete_parsed(PromptStage stage, const std::string& prompt,
                                  std::uint64_t ordinal, Parser&& parser,
                                  double temperature_override) {
  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, client_.profile().max_attempts); ++attempt) {
    const std::string content =
        client_.complete(stage, prompt, ordinal, attempt > 0, temperature_override);
    last_raw_ = content;
    try {
      return parser(content);
    } catch (const ParseError& e) {
      last_error = e.what();
      log_warn("parse failure on stage " + std::string(to_string(stage)) + " attempt " +
               std::to_string(attempt + 1) + ": " + last_error);
      if (client_.offline()) break;  // a cached response cannot be re-rolled offline
    }
  }
  throw ParseError("stage " + std::string(to_string(stage)) +
                   " response unusable after retries: " + last_error);
}

std::vector<PlotEvent> LlmProvider::propose(const ProposeRequest& req) {
  counts_.bump("propose");
  const EventOrigin origin = req.direction == Direction::Forward
                                 ? EventOrigin::ForwardSearch
                                 : EventOrigin::BackwardSearch;
  std::vector<PlotEvent> events;
  if (req.direction == Direction::Backward) {
    // One request returns the whole ranked candidate list.
    const std::string prompt =
        render_template(load_template("rising_action"),
                        {{"theme", theme_.text}, {"outline", outline_for_prompt(req.outline)}});
    const auto texts = complete_parsed(
        PromptStage::PlotGeneration, prompt, req.salt,
        [&](const std::string& content) {
          return parse_events_response(content, static_cast<std::size_t>(req.k));
        },
        req.temperature);
    for (const auto& text : texts) events.push_back(PlotEvent{id_gen_.next(), text, origin});
    return events;
  }
  // The forward prompt yields a single plot; honor the k-candidate contract
  // by sampling it k times under distinct cache ordinals.
  const std::string prompt =
      render_template(load_template("falling_action"),
                      {{"theme", theme_.text}, {"outline", outline_for_prompt(req.outline)}});
  for (int i = 0; i < req.k; ++i) {
    const std::uint64_t ordinal = req.salt * 1000 + static_cast<std::uint64_t>(i);
    const std::string text = complete_parsed(
        PromptStage::PlotGeneration, prompt, ordinal,
        [](const std::string& content) { return parse_plot_response(content); },
        req.temperature);
    events.push_back(PlotEvent{id_gen_.next(), text, origin});
  }
  return events;
}

PlotEvent LlmProvider::sample_extension(const Outline& outline, Direction dir,
                                        std::uint64_t salt) {
  counts_.bump("sample");
  const std::string tpl_name = dir == Direction::Forward ? "falling_action" : "rising_action";
  const std::string prompt =
      render_template(load_template(tpl_name),
                      {{"theme", theme_.text}, {"outline", outline_for_prompt(outline)}});
  std::string text;
  if (dir == Direction::Forward) {
    text = complete_parsed(PromptStage::PlotGeneration, prompt, salt,
                           [](const std::string& c) { return parse_plot_response(c); });
  } else {
    text = complete_parsed(PromptStage::PlotGeneration, prompt, salt,
                           [](const std::string& c) {
                             return parse_events_response(c, 1).front();
                           });
  }
  return PlotEvent{id_gen_.next(), text, EventOrigin::Simulation};
}

ScoreBreakdown LlmProvider::score(const Outline& outline) {
  counts_.bump("score");
  const std::string prompt =
      render_template(load_template("evaluation"),
                      {{"theme", theme_.text}, {"outline", outline_for_prompt(outline)}});
  return complete_parsed(PromptStage::Evaluation, prompt, 0,
                         [](const std::string& c) { return parse_score_response(c); });
}

std::size_t LlmProvider::screen(const std::vector<std::string>& candidates,
                                ScreeningStage stage) {
  counts_.bump("screen");
  if (candidates.size() == 1) return 0;
  const bool conflict_stage = stage == ScreeningStage::Conflict;
  const std::string prompt = render_template(
      load_template(conflict_stage ? "conflict_screening" : "climax_screening"),
      {{"theme", theme_.text},
       {"conflict", conflict_},
       {"candidates", numbered_candidates(candidates)}});
  const PromptStage prompt_stage =
      conflict_stage ? PromptStage::Screening : PromptStage::ClimaxScreening;
  // Screening is cosmetic enough that persistent parse failures degrade to
  // the first candidate instead of killing the run.
  for (int attempt = 0; attempt < 3; ++attempt) {
    try {
      const std::string content = client_.complete(prompt_stage, prompt, 0, attempt > 0);
      last_raw_ = content;
      const nlohmann::json j = extract_json_object(content);
      if (!j.contains("best")) throw ParseError("screening response lacks \"best\"");
      return resolve_choice(j["best"], candidates);
    } catch (const ParseError& e) {
      log_warn("screening parse attempt " + std::to_string(attempt + 1) + " failed: " +
               e.what());
      if (client_.offline()) break;
    }
  }
  log_warn("screening unresolvable after retries; falling back to candidate 0");
  return 0;
}

std::vector<std::string> LlmProvider::conflict_candidates(const Theme& theme, int n) {
  counts_.bump("conflict");
  const std::string prompt =
      render_template(load_template("conflict"), {{"theme", theme.text}});
  auto texts =
      complete_parsed(PromptStage::Conflict, prompt, 0, [&](const std::string& content) {
        auto parsed = parse_candidate_set(content);
        if (parsed.empty()) throw ParseError("no conflict candidates parsed");
        return parsed;
      });
  if (static_cast<int>(texts.size()) < n) {
    log_warn("expected " + std::to_string(n) + " conflict candidates, got " +
             std::to_string(texts.size()) + "; proceeding");
  }
  if (static_cast<int>(texts.size()) > n) texts.resize(static_cast<std::size_t>(n));
  return texts;
}

std::vector<std::string> LlmProvider::climax_candidates(const Theme& theme,
                                                        const std::string& conflict, int n) {
  counts_.bump("climax");
  const std::string prompt = render_template(
      load_template("climax"), {{"theme", theme.text}, {"conflict", conflict}});
  auto texts = complete_parsed(PromptStage::Climax, prompt, 0, [&](const std::string& content) {
    auto parsed = parse_candidate_set(content);
    if (parsed.empty()) throw ParseError("no climax candidates parsed");
    return parsed;
  });
  if (static_cast<int>(texts.size()) < n) {
    log_warn("expected " + std::to_string(n) + " climax candidates, got " +
             std::to_string(texts.size()) + "; proceeding");
  }
  if (static_cast<int>(texts.size()) > n) texts.resize(static_cast<std::size_t>(n));
  return texts;
}

Bookends LlmProvider::generate_bookends(const Outline& outline) {
  counts_.bump("bookends");
  const std::string prompt =
      render_template(load_template("bookends"),
                      {{"theme", theme_.text}, {"outline", outline_for_prompt(outline)}});
  return complete_parsed(PromptStage::Bookends, prompt, 0,
                         [](const std::string& c) { return parse_bookends_response(c); });
}

std::vector<EditOp> LlmProvider::critique_outline(const Outline& outline) {
  counts_.bump("critique");
  const std::string prompt =
      render_template(load_template("critique"),
                      {{"theme", theme_.text}, {"outline", outline_for_prompt(outline)}});
  return complete_parsed(PromptStage::Critique, prompt, 0,
                         [](const std::string& c) { return parse_edit_script(c); });
}

std::string LlmProvider::fiction_segment(const StagedOutline& outline, FictionSegment segment) {
  counts_.bump("segment");
  const std::string prompt = render_template(
      load_template(segment_template_name(segment)),
      {{"theme", theme_.text}, {"outline", staged_outline_for_prompt(outline)}});
  return complete_parsed(PromptStage::Fiction, prompt, 0, [&](const std::string& content) {
    if (content.empty()) throw ParseError("empty fiction segment");
    return content;
  });
}

DirectOutlineResponse LlmProvider::direct_outline(const std::string& conflict,
                                                  const std::string& climax) {
  counts_.bump("direct");
  const std::string prompt = render_template(
      load_template("direct_outline"),
      {{"theme", theme_.text}, {"conflict", conflict}, {"climax", climax}});
  return complete_parsed(PromptStage::DirectOutline, prompt, 0,
                         [](const std::string& c) { return parse_direct_outline(c); });
}

// ------------------------------------------------------------- LlmJudge ----

LlmJudge::LlmJudge(ProviderProfile profile, ResponseCache* cache, bool offline,
                   std::unique_ptr<ChatTransport> transport_override)
    : client_(profile, cache, offline,
              make_transport(profile, offline, std::move(transport_override))),
      prompts_dir_(profile.prompts_dir) {}

Judgment LlmJudge::judge_comparative(const std::vector<std::string>& fictions,
                                     const std::vector<std::string>& dimensions,
                                     bool include_worst) {
  if (template_text_.empty()) {
    const auto path = prompts_dir_ / "judge_comparative.txt";
    std::ifstream in(path);
    if (!in) throw ConfigError("prompt template not found: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    template_text_ = buffer.str();
  }
  std::vector<std::string> labels;
  std::ostringstream fiction_block;
  for (std::size_t i = 0; i < fictions.size(); ++i) {
    std::string label(1, static_cast<char>('A' + i));
    fiction_block << "=== Fiction " << label << " ===\n" << fictions[i] << "\n\n";
    labels.push_back(std::move(label));
  }
  std::ostringstream dim_block;
  for (const auto& d : dimensions) dim_block << "- " << d << "\n";
  const std::string prompt = render_template(
      template_text_, {{"fictions", fiction_block.str()}, {"dimensions", dim_block.str()}});
  const std::string content = client_.complete(PromptStage::Judge, prompt, 0);
  return parse_judgment(content, labels, fictions, dimensions, include_worst);
}

}  // namespace bitmcts
