#include "bitmcts/baselines.hpp"

#include <algorithm>

#include "bitmcts/errors.hpp"

namespace bitmcts {

void StrategySpec::validate() const {
  if (kind == StrategyKind::Beam && beam_width < 1) {
    throw ConfigError("beam width must be >= 1");
  }
  if (kind == StrategyKind::BestOfN && best_of_n < 1) {
    throw ConfigError("best-of-n requires n >= 1");
  }
  if ((kind == StrategyKind::Beam || kind == StrategyKind::BestOfN) && depth < 1) {
    throw ConfigError("depth budget must be >= 1");
  }
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::BitMcts: return "bit-mcts";
    case StrategyKind::Beam: return "beam";
    case StrategyKind::BestOfN: return "best-of-n";
    case StrategyKind::Direct: return "direct";
    case StrategyKind::UnidirectionalForward: return "unidirectional-forward";
    case StrategyKind::OrderSwapped: return "order-swapped";
    case StrategyKind::NoEarlyStop: return "no-early-stop";
  }
  return "bit-mcts";
}

StrategyKind strategy_kind_from_string(std::string_view s) {
  if (s == "bit-mcts") return StrategyKind::BitMcts;
  if (s == "beam") return StrategyKind::Beam;
  if (s == "best-of-n") return StrategyKind::BestOfN;
  if (s == "direct") return StrategyKind::Direct;
  if (s == "unidirectional-forward") return StrategyKind::UnidirectionalForward;
  if (s == "order-swapped") return StrategyKind::OrderSwapped;
  if (s == "no-early-stop") return StrategyKind::NoEarlyStop;
  throw ConfigError("unknown strategy kind: " + std::string(s));
}

namespace {

Outline extend(const Outline& outline, PlotEvent event, Direction dir) {
  return dir == Direction::Forward ? outline.appended(std::move(event))
                                   : outline.prepended(std::move(event));
}

// Same admissibility rule as the engine: no candidate may duplicate (by
// normalized text) an event already in the outline.
bool admissible(const Outline& outline, const PlotEvent& candidate) {
  return !candidate.text.empty() && !outline.contains_normalized_text(candidate.text);
}

}  // namespace

Outline beam_search_phase(const Outline& root, Direction dir, int width, int depth, int k_max,
                          Proposer& proposer, Evaluator& evaluator) {
  if (width < 1) throw ConfigError("beam width must be >= 1");
  struct Scored {
    Outline outline;
    double score;
  };
  std::vector<Scored> beam{{root, clamp_reward(evaluator.score(root).total)}};
  Scored best = beam.front();

  for (int level = 0; level < depth; ++level) {
    std::vector<Scored> extensions;
    for (const auto& entry : beam) {
      const auto candidates =
          proposer.propose(ProposeRequest{entry.outline, dir, k_max, 0});
      for (const auto& candidate : candidates) {
        if (!admissible(entry.outline, candidate)) continue;
        Outline grown = extend(entry.outline, candidate, dir);
        const double score = clamp_reward(evaluator.score(grown).total);
        extensions.push_back(Scored{std::move(grown), score});
      }
    }
    if (extensions.empty()) break;
    // Stable sort keeps insertion order among ties.
    std::stable_sort(extensions.begin(), extensions.end(),
                     [](const Scored& a, const Scored& b) { return a.score > b.score; });
    if (static_cast<int>(extensions.size()) > width) {
      extensions.erase(extensions.begin() + width, extensions.end());
    }
    beam = std::move(extensions);
    if (beam.front().score > best.score) best = beam.front();
  }
  return best.outline;
}

Outline beam_search_bidirectional(const PlotEvent& climax, int width, int depth, int k_max,
                                  Proposer& proposer, Evaluator& evaluator) {
  const Outline forward = beam_search_phase(Outline::root(climax), Direction::Forward, width,
                                            depth, k_max, proposer, evaluator);
  return beam_search_phase(forward, Direction::Backward, width, depth, k_max, proposer,
                           evaluator);
}

Outline best_of_n(const PlotEvent& climax, int n, int depth, Proposer& proposer,
                  Evaluator& evaluator) {
  if (n < 1) throw ConfigError("best-of-n requires n >= 1");
  const Outline root = Outline::root(climax);
  bool have_best = false;
  Outline best = root;
  double best_score = 0.0;

  for (int rollout = 0; rollout < n; ++rollout) {
    Outline current = root;
    for (Direction dir : {Direction::Forward, Direction::Backward}) {
      for (int step = 0; step < depth; ++step) {
        PlotEvent sample =
            proposer.sample_extension(current, dir, static_cast<std::uint64_t>(rollout));
        if (!admissible(current, sample)) break;
        // Rollout events are part of the returned outline, so they carry
        // their search direction rather than a rollout marker.
        sample.origin = dir == Direction::Forward ? EventOrigin::ForwardSearch
                                                  : EventOrigin::BackwardSearch;
        current = extend(current, std::move(sample), dir);
      }
    }
    const double score = clamp_reward(evaluator.score(current).total);
    if (!have_best || score > best_score) {
      have_best = true;
      best = current;
      best_score = score;
    }
  }
  return best;
}

Outline direct_outline_search(const std::string& conflict, const PlotEvent& climax,
                              StoryProvider& provider, EventIdGenerator& ids) {
  const DirectOutlineResponse response = provider.direct_outline(conflict, climax.text);
  const int position =
      std::clamp(response.climax_position, 0, static_cast<int>(response.events.size()));
  std::vector<PlotEvent> events;
  for (int i = 0; i < static_cast<int>(response.events.size()); ++i) {
    const EventOrigin origin =
        i < position ? EventOrigin::BackwardSearch : EventOrigin::ForwardSearch;
    events.push_back(PlotEvent{ids.next(), response.events[static_cast<std::size_t>(i)], origin});
  }
  events.insert(events.begin() + position, climax);
  return Outline::from_parts(std::move(events), static_cast<std::size_t>(position));
}

FictionArtifact run_variant(const StrategySpec& spec, const Theme& theme,
                            const PipelineOptions& options, StoryProvider& provider) {
  PipelineOptions variant_options = options;
  variant_options.strategy = spec;
  return run_pipeline(theme, variant_options, provider);
}

}  // namespace bitmcts
