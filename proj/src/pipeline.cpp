#include "bitmcts/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "bitmcts/baselines.hpp"
#include "bitmcts/errors.hpp"
#include "bitmcts/eval.hpp"
#include "bitmcts/logging.hpp"

namespace bitmcts {

std::size_t screen_best(Screener& screener, const std::vector<std::string>& candidates,
                        ScreeningStage stage) {
  if (candidates.empty()) throw InvariantError("screening requires at least one candidate");
  if (candidates.size() == 1) return 0;  // forced choice, no provider call
  const std::size_t pick = screener.screen(candidates, stage);
  if (pick >= candidates.size()) {
    throw InvariantError("screener returned out-of-range index");
  }
  return pick;
}

ConflictSpec generate_conflict(const Theme& theme, StoryProvider& provider) {
  ConflictSpec spec;
  spec.theme = theme;
  spec.candidates = provider.conflict_candidates(theme, 5);
  spec.raw_generation = provider.last_raw_response();
  if (spec.candidates.empty()) {
    throw ProviderError("conflict generation produced no candidates");
  }
  spec.chosen_index =
      static_cast<int>(screen_best(provider, spec.candidates, ScreeningStage::Conflict));
  spec.raw_screening = provider.last_raw_response();
  spec.conflict_text = spec.candidates[static_cast<std::size_t>(spec.chosen_index)];
  return spec;
}

ClimaxResult generate_climax(const ConflictSpec& conflict, StoryProvider& provider,
                             EventIdGenerator& ids) {
  ClimaxResult result;
  result.candidates = provider.climax_candidates(conflict.theme, conflict.conflict_text, 5);
  result.raw_generation = provider.last_raw_response();
  if (result.candidates.empty()) {
    throw ProviderError("climax generation produced no candidates");
  }
  result.chosen_index =
      static_cast<int>(screen_best(provider, result.candidates, ScreeningStage::Climax));
  result.raw_screening = provider.last_raw_response();
  result.event = PlotEvent{
      ids.next(),
      result.candidates[static_cast<std::size_t>(result.chosen_index)],
      EventOrigin::Climax,
  };
  return result;
}

Outline apply_edit_script(const Outline& outline, const std::vector<EditOp>& ops,
                          EventIdGenerator& ids) {
  const std::string climax_id = outline.climax().id;
  std::vector<PlotEvent> events = outline.events();

  const auto check_index = [&](int index, std::size_t size) {
    if (index < 0 || static_cast<std::size_t>(index) >= size) {
      throw InvariantError("edit script index out of range: " + std::to_string(index));
    }
  };

  for (const auto& op : ops) {
    switch (op.kind) {
      case EditOp::Kind::Keep:
        check_index(op.index, events.size());
        break;
      case EditOp::Kind::Move: {
        check_index(op.index, events.size());
        check_index(op.to, events.size());
        PlotEvent moved = std::move(events[static_cast<std::size_t>(op.index)]);
        events.erase(events.begin() + op.index);
        events.insert(events.begin() + op.to, std::move(moved));
        break;
      }
      case EditOp::Kind::Insert: {
        if (op.index < 0 || static_cast<std::size_t>(op.index) > events.size()) {
          throw InvariantError("edit script insert position out of range: " +
                               std::to_string(op.index));
        }
        events.insert(events.begin() + op.index,
                      PlotEvent{ids.next(), op.text, EventOrigin::RefinementEdit});
        break;
      }
      case EditOp::Kind::Delete: {
        check_index(op.index, events.size());
        if (events[static_cast<std::size_t>(op.index)].id == climax_id) {
          throw InvariantError("edit script attempts to delete the climax event");
        }
        events.erase(events.begin() + op.index);
        break;
      }
    }
  }

  std::size_t climax_index = events.size();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].id == climax_id) {
      climax_index = i;
      break;
    }
  }
  if (climax_index == events.size()) {
    throw InvariantError("edit script lost the climax event");
  }
  return Outline::from_parts(std::move(events), climax_index);
}

StagedOutline refine_outline(const Outline& rough, StoryProvider& provider,
                             EventIdGenerator& ids) {
  // Step 1: bookends. One call coordinates the opening and closing.
  const Bookends bookends = provider.generate_bookends(rough);
  Outline with_bookends =
      rough.prepended(PlotEvent{ids.next(), bookends.opening, EventOrigin::RefinementOpening})
          .appended(PlotEvent{ids.next(), bookends.closing, EventOrigin::RefinementClosing});

  // Step 2: self-critic edit script, applied only when it is wholly valid.
  Outline refined = with_bookends;
  try {
    const std::vector<EditOp> script = provider.critique_outline(with_bookends);
    refined = apply_edit_script(with_bookends, script, ids);
  } catch (const InvariantError& e) {
    log_warn(std::string("self-critic edit script rejected, keeping outline: ") + e.what());
    refined = with_bookends;
  } catch (const ParseError& e) {
    log_warn(std::string("self-critic response unusable, keeping outline: ") + e.what());
    refined = with_bookends;
  }
  return stage_partition(refined);
}

FictionSegments generate_fiction(const StagedOutline& refined, StoryProvider& provider) {
  FictionSegments segments;
  segments.beginning = provider.fiction_segment(refined, FictionSegment::Beginning);
  segments.body = provider.fiction_segment(refined, FictionSegment::Body);
  segments.ending = provider.fiction_segment(refined, FictionSegment::Ending);
  if (segments.beginning.empty() || segments.body.empty() || segments.ending.empty()) {
    throw ProviderError("fiction segment came back empty");
  }
  return segments;
}

// --------------------------------------------------------------- file IO ---

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string(), exit_code::kConfig);
  out << j.dump(2) << "\n";
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string(), exit_code::kConfig);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string(), exit_code::kConfig);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string(), exit_code::kConfig);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// --------------------------------------------------------- serialization ---

nlohmann::json to_json(const SearchConfig& config) {
  return nlohmann::json{
      {"d_max", config.d_max},
      {"direction", std::string(to_string(config.direction))},
      {"early_stopping", config.early_stopping},
      {"exploration_c", config.exploration_c},
      {"iterations", config.iterations},
      {"k_max", config.k_max},
      {"s_max", config.s_max},
      {"seed", config.seed},
  };
}

SearchConfig search_config_from_json(const nlohmann::json& j) {
  SearchConfig config;
  config.d_max = j.value("d_max", config.d_max);
  config.direction =
      j.value("direction", "forward") == std::string("backward") ? Direction::Backward
                                                                 : Direction::Forward;
  config.early_stopping = j.value("early_stopping", true);
  config.exploration_c = j.value("exploration_c", config.exploration_c);
  config.iterations = j.value("iterations", config.iterations);
  config.k_max = j.value("k_max", config.k_max);
  config.s_max = j.value("s_max", config.s_max);
  config.seed = j.value("seed", config.seed);
  return config;
}

nlohmann::json to_json(const StrategySpec& spec) {
  return nlohmann::json{
      {"beam_width", spec.beam_width},
      {"best_of_n", spec.best_of_n},
      {"depth", spec.depth},
      {"kind", std::string(to_string(spec.kind))},
  };
}

StrategySpec strategy_spec_from_json(const nlohmann::json& j) {
  StrategySpec spec;
  spec.kind = strategy_kind_from_string(j.value("kind", "bit-mcts"));
  spec.beam_width = j.value("beam_width", spec.beam_width);
  spec.best_of_n = j.value("best_of_n", spec.best_of_n);
  spec.depth = j.value("depth", spec.depth);
  return spec;
}

nlohmann::json to_json(const ConflictSpec& spec) {
  return nlohmann::json{
      {"candidates", spec.candidates},
      {"chosen_index", spec.chosen_index},
      {"conflict_text", spec.conflict_text},
      {"raw_generation", spec.raw_generation},
      {"raw_screening", spec.raw_screening},
      {"theme", {{"id", spec.theme.id}, {"text", spec.theme.text}}},
  };
}

ConflictSpec conflict_spec_from_json(const nlohmann::json& j) {
  ConflictSpec spec;
  spec.candidates = j.at("candidates").get<std::vector<std::string>>();
  spec.chosen_index = j.at("chosen_index").get<int>();
  spec.conflict_text = j.at("conflict_text").get<std::string>();
  spec.raw_generation = j.value("raw_generation", "");
  spec.raw_screening = j.value("raw_screening", "");
  spec.theme = Theme{j.at("theme").at("id").get<std::string>(),
                     j.at("theme").at("text").get<std::string>()};
  return spec;
}

nlohmann::json to_json(const ClimaxResult& result) {
  return nlohmann::json{
      {"candidates", result.candidates},
      {"chosen_index", result.chosen_index},
      {"event", to_json(result.event)},
      {"raw_generation", result.raw_generation},
      {"raw_screening", result.raw_screening},
  };
}

ClimaxResult climax_result_from_json(const nlohmann::json& j) {
  ClimaxResult result;
  result.candidates = j.at("candidates").get<std::vector<std::string>>();
  result.chosen_index = j.at("chosen_index").get<int>();
  result.event = plot_event_from_json(j.at("event"));
  result.raw_generation = j.value("raw_generation", "");
  result.raw_screening = j.value("raw_screening", "");
  return result;
}

// ------------------------------------------------------------ run driver ---

namespace {

struct SearchStageOutput {
  Outline rough;
  nlohmann::json tree_forward;
  nlohmann::json tree_backward;

  SearchStageOutput() : rough(Outline::root(PlotEvent{"-", "-", EventOrigin::Climax})) {}
};

nlohmann::json empty_tree_json(const SearchConfig& config) {
  SearchResult empty;
  empty.iterations_run = 0;
  return search_result_to_json(empty, config);
}

SearchStageOutput run_search_stage(const PlotEvent& climax, const PipelineOptions& options,
                                   StoryProvider& provider) {
  SearchStageOutput out;
  SearchConfig forward = options.forward;
  SearchConfig backward = options.backward;
  forward.direction = Direction::Forward;
  backward.direction = Direction::Backward;

  switch (options.strategy.kind) {
    case StrategyKind::BitMcts:
    case StrategyKind::OrderSwapped:
    case StrategyKind::NoEarlyStop: {
      const bool swapped = options.strategy.kind == StrategyKind::OrderSwapped;
      if (options.strategy.kind == StrategyKind::NoEarlyStop) {
        forward.early_stopping = false;
        backward.early_stopping = false;
      }
      BidirectionalResult result = bidirectional_search(climax, forward, backward, provider,
                                                        provider, swapped, &provider.counts());
      out.rough = result.outline;
      const SearchResult& fwd = swapped ? result.second_phase : result.first_phase;
      const SearchResult& bwd = swapped ? result.first_phase : result.second_phase;
      out.tree_forward = search_result_to_json(fwd, forward);
      out.tree_backward = search_result_to_json(bwd, backward);
      break;
    }
    case StrategyKind::UnidirectionalForward: {
      SearchResult result =
          run_phase(Outline::root(climax), forward, provider, provider, &provider.counts());
      out.rough = result.best_outline;
      out.tree_forward = search_result_to_json(result, forward);
      out.tree_backward = empty_tree_json(backward);
      break;
    }
    case StrategyKind::Beam: {
      out.rough = beam_search_bidirectional(climax, options.strategy.beam_width,
                                            options.strategy.depth, forward.k_max, provider,
                                            provider);
      out.tree_forward = empty_tree_json(forward);
      out.tree_backward = empty_tree_json(backward);
      break;
    }
    case StrategyKind::BestOfN: {
      out.rough = best_of_n(climax, options.strategy.best_of_n, options.strategy.depth,
                            provider, provider);
      out.tree_forward = empty_tree_json(forward);
      out.tree_backward = empty_tree_json(backward);
      break;
    }
    case StrategyKind::Direct: {
      throw InvariantError("direct strategy is dispatched before the search stage");
    }
  }
  return out;
}

std::string iso_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

nlohmann::json fiction_length_json(const FictionArtifact& artifact,
                                   std::optional<std::int64_t> reported_tokens) {
  nlohmann::json j{
      {"codepoints", count_codepoints(artifact.full_text)},
      {"whitespace_tokens", count_whitespace_tokens(artifact.full_text)},
  };
  if (reported_tokens.has_value()) {
    j["reported_tokens"] = *reported_tokens;
  } else {
    j["reported_tokens"] = nullptr;
  }
  return j;
}

}  // namespace

FictionArtifact run_pipeline(const Theme& theme, const PipelineOptions& options,
                             StoryProvider& provider) {
  options.strategy.validate();
  const bool persist = !options.run_dir.empty();
  if (persist) std::filesystem::create_directories(options.run_dir);

  const auto stage_path = [&](const char* name) { return options.run_dir / name; };
  const auto stage_done = [&](const char* name) {
    return persist && std::filesystem::exists(stage_path(name));
  };

  // One generator per minting stage: a resumed stage then produces exactly
  // the ids a fresh run would, and skipped stages cannot shift the stream.
  EventIdGenerator climax_ids(options.forward.seed ^ 0x517CC1B727220A95ull);
  EventIdGenerator refine_ids(options.forward.seed ^ 0x2545F4914F6CDD1Dull);
  EventIdGenerator direct_ids(options.forward.seed ^ 0x9E6D62D06F6A9A9Bull);
  FictionArtifact artifact;
  artifact.theme = theme;
  std::vector<std::string> stages_run;

  const auto write_run_json = [&] {
    if (!persist) return;
    std::vector<std::string> persisted;
    if (std::filesystem::exists(stage_path(run_files::kConflict))) persisted.push_back("conflict");
    if (std::filesystem::exists(stage_path(run_files::kClimax))) persisted.push_back("climax");
    if (std::filesystem::exists(stage_path(run_files::kRoughOutline))) persisted.push_back("search");
    if (std::filesystem::exists(stage_path(run_files::kRefinedOutline))) {
      persisted.push_back("refinement");
    }
    if (std::filesystem::exists(stage_path(run_files::kFiction))) persisted.push_back("fiction");
    write_json_file(stage_path(run_files::kRun),
                    nlohmann::json{
                        {"forward", to_json(options.forward)},
                        {"backward", to_json(options.backward)},
                        {"fiction_enabled", options.fiction_enabled},
                        {"refinement_enabled", options.refinement_enabled},
                        {"stages_completed", persisted},
                        {"strategy", to_json(options.strategy)},
                        {"theme", {{"id", theme.id}, {"text", theme.text}}},
                    });
  };
  write_run_json();

  // Stage 1a: conflict.
  if (stage_done(run_files::kConflict)) {
    artifact.conflict = conflict_spec_from_json(read_json_file(stage_path(run_files::kConflict)));
  } else {
    provider.set_context(theme, "");
    artifact.conflict = generate_conflict(theme, provider);
    stages_run.push_back("conflict");
    if (persist) write_json_file(stage_path(run_files::kConflict), to_json(artifact.conflict));
    write_run_json();
  }
  provider.set_context(theme, artifact.conflict.conflict_text);

  // Stage 1b: climax.
  if (stage_done(run_files::kClimax)) {
    artifact.climax = climax_result_from_json(read_json_file(stage_path(run_files::kClimax)));
  } else {
    artifact.climax = generate_climax(artifact.conflict, provider, climax_ids);
    stages_run.push_back("climax");
    if (persist) write_json_file(stage_path(run_files::kClimax), to_json(artifact.climax));
    write_run_json();
  }

  // Stage 2: search (or the direct-generation ablation).
  if (stage_done(run_files::kRoughOutline)) {
    artifact.rough_outline = outline_from_json(read_json_file(stage_path(run_files::kRoughOutline)));
  } else {
    if (options.strategy.kind == StrategyKind::Direct) {
      artifact.rough_outline = direct_outline_search(
          artifact.conflict.conflict_text, artifact.climax.event, provider, direct_ids);
      if (persist) {
        write_json_file(stage_path(run_files::kTreeForward), empty_tree_json(options.forward));
        write_json_file(stage_path(run_files::kTreeBackward), empty_tree_json(options.backward));
      }
    } else {
      SearchStageOutput search = run_search_stage(artifact.climax.event, options, provider);
      artifact.rough_outline = search.rough;
      if (persist) {
        write_json_file(stage_path(run_files::kTreeForward), search.tree_forward);
        write_json_file(stage_path(run_files::kTreeBackward), search.tree_backward);
      }
    }
    stages_run.push_back("search");
    if (persist) {
      write_json_file(stage_path(run_files::kRoughOutline), to_json(artifact.rough_outline));
    }
    write_run_json();
  }

  // Stage 3: refinement (ablatable).
  if (stage_done(run_files::kRefinedOutline)) {
    artifact.refined_outline =
        staged_outline_from_json(read_json_file(stage_path(run_files::kRefinedOutline)));
  } else {
    artifact.refined_outline = options.refinement_enabled
                                   ? refine_outline(artifact.rough_outline, provider, refine_ids)
                                   : stage_partition(artifact.rough_outline);
    stages_run.push_back("refinement");
    if (persist) {
      write_json_file(stage_path(run_files::kRefinedOutline), to_json(artifact.refined_outline));
    }
    write_run_json();
  }

  // Stage 4: segmented realization.
  if (stage_done(run_files::kFiction)) {
    // Segment boundaries are not persisted; the loaded text counts as the
    // body so the concatenation identity still holds.
    artifact.full_text = read_text_file(stage_path(run_files::kFiction));
    artifact.body = artifact.full_text;
  } else if (options.fiction_enabled) {
    const FictionSegments segments = generate_fiction(artifact.refined_outline, provider);
    artifact.beginning = segments.beginning;
    artifact.body = segments.body;
    artifact.ending = segments.ending;
    artifact.full_text = segments.beginning + segments.body + segments.ending;
    stages_run.push_back("fiction");
    if (persist) write_text_file(stage_path(run_files::kFiction), artifact.full_text);
    write_run_json();
  }

  artifact.metadata = nlohmann::json{
      {"call_counts", provider.counts().snapshot()},
      {"refinement_enabled", options.refinement_enabled},
      {"seeds", {{"backward", options.backward.seed}, {"forward", options.forward.seed}}},
      {"stages_run", stages_run},
      {"strategy", to_json(options.strategy)},
      {"theme_id", theme.id},
  };
  if (options.record_timestamps) {
    artifact.metadata["timestamp"] = iso_timestamp_now();
  }
  if (persist) {
    nlohmann::json metrics{
        {"call_counts", provider.counts().snapshot()},
        {"fiction_length", fiction_length_json(artifact, provider.tokens_reported())},
        {"stages_run", stages_run},
        {"strategy", std::string(to_string(options.strategy.kind))},
    };
    write_json_file(stage_path(run_files::kMetrics), metrics);
  }
  return artifact;
}

FictionArtifact resume_pipeline(const std::filesystem::path& run_dir, StoryProvider& provider) {
  if (!std::filesystem::exists(run_dir / run_files::kRun)) {
    throw ConfigError("run directory has no run.json: " + run_dir.string());
  }
  const nlohmann::json run = read_json_file(run_dir / run_files::kRun);
  PipelineOptions options;
  options.forward = search_config_from_json(run.at("forward"));
  options.backward = search_config_from_json(run.at("backward"));
  options.strategy = strategy_spec_from_json(run.at("strategy"));
  options.refinement_enabled = run.value("refinement_enabled", true);
  options.fiction_enabled = run.value("fiction_enabled", true);
  options.run_dir = run_dir;
  const Theme theme{run.at("theme").at("id").get<std::string>(),
                    run.at("theme").at("text").get<std::string>()};
  return run_pipeline(theme, options, provider);
}

}  // namespace bitmcts
