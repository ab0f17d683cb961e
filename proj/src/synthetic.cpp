#include "bitmcts/synthetic.hpp"

#include <algorithm>
#include <cstdlib>

#include "bitmcts/rng.hpp"

namespace bitmcts {

namespace {

// Content view of an outline: texts and anchor only. Ids are run-local
// bookkeeping and must not influence synthetic responses, otherwise replaying
// the same visible state would diverge.
std::uint64_t outline_digest(const Outline& outline, std::uint64_t seed) {
  HashStream h;
  h.add(seed).add(static_cast<std::uint64_t>(outline.climax_index()));
  for (const auto& e : outline.events()) h.add(e.text);
  return h.digest();
}

PlotEvent make_event(std::uint64_t stream, const std::string& text, EventOrigin origin) {
  return PlotEvent{hex64(fnv1a64(stream, 0x6A09E667F3BCC908ull)), text, origin};
}

int length_total(const Outline& outline, bool monotone) {
  const int n = static_cast<int>(outline.size());
  return monotone ? std::min(10, n) : std::max(1, 11 - n);
}

int target_total(const Outline& outline, const std::vector<std::string>& target) {
  const auto& events = outline.events();
  std::size_t mismatches =
      events.size() > target.size() ? events.size() - target.size()
                                    : target.size() - events.size();
  for (std::size_t i = 0; i < std::min(events.size(), target.size()); ++i) {
    if (events[i].text != target[i]) ++mismatches;
  }
  return std::max(1, 10 - static_cast<int>(mismatches));
}

}  // namespace

SyntheticProvider::SyntheticProvider(SyntheticOptions options) : options_(options) {}

void SyntheticProvider::set_context(const Theme& theme, const std::string& conflict_text) {
  theme_ = theme;
  conflict_ = conflict_text;
}

std::vector<PlotEvent> SyntheticProvider::propose(const ProposeRequest& req) {
  counts_.bump("propose");
  const std::uint64_t base = HashStream()
                                 .add(outline_digest(req.outline, options_.seed))
                                 .add(to_string(req.direction))
                                 .add("propose")
                                 .add(req.salt)
                                 .digest();
  const EventOrigin origin = req.direction == Direction::Forward
                                 ? EventOrigin::ForwardSearch
                                 : EventOrigin::BackwardSearch;
  std::vector<PlotEvent> events;
  for (int i = 0; i < req.k; ++i) {
    const std::uint64_t stream = fnv1a64(static_cast<std::uint64_t>(i), base);
    const char dir_tag = req.direction == Direction::Forward ? 'f' : 'b';
    std::string text = "plot-";
    text += dir_tag;
    text += '-';
    text += hex64(stream).substr(0, 12);
    events.push_back(make_event(stream, text, origin));
  }
  return events;
}

PlotEvent SyntheticProvider::sample_extension(const Outline& outline, Direction dir,
                                              std::uint64_t salt) {
  counts_.bump("sample");
  // Draws come from the same candidate pool propose() exposes, which keeps
  // the rollout space finite and enumerable. The deterministic provider
  // always draws the top candidate (ignoring the salt); the stochastic
  // variant walks the pool via its draw counter.
  constexpr int kPool = 4;
  const std::uint64_t base = HashStream()
                                 .add(outline_digest(outline, options_.seed))
                                 .add(to_string(dir))
                                 .add("propose")
                                 .add(std::uint64_t{0})
                                 .digest();
  std::uint64_t index = 0;
  if (options_.stochastic_sampling) {
    index = mix64(HashStream().add(base).add(salt).add(draw_counter_++).digest()) %
            static_cast<std::uint64_t>(kPool);
  }
  const std::uint64_t stream = fnv1a64(index, base);
  const char dir_tag = dir == Direction::Forward ? 'f' : 'b';
  std::string text = "plot-";
  text += dir_tag;
  text += '-';
  text += hex64(stream).substr(0, 12);
  return PlotEvent{hex64(fnv1a64(stream, 0x9216D5D98979FB1Bull)), text,
                   EventOrigin::Simulation};
}

ScoreBreakdown SyntheticProvider::score(const Outline& outline) {
  counts_.bump("score");
  std::map<std::string, int> dims;
  switch (options_.evaluator) {
    case SyntheticEvaluatorMode::Hashed: {
      SplitMix64 rng(HashStream()
                         .add(outline_digest(outline, options_.seed))
                         .add("score")
                         .digest());
      for (auto d : ScoreBreakdown::dimensions()) {
        dims[std::string(d)] = 1 + static_cast<int>(rng.below(10));
      }
      break;
    }
    case SyntheticEvaluatorMode::LengthMonotone:
    case SyntheticEvaluatorMode::LengthDecreasing: {
      const int t = length_total(outline,
                                 options_.evaluator == SyntheticEvaluatorMode::LengthMonotone);
      for (auto d : ScoreBreakdown::dimensions()) dims[std::string(d)] = t;
      break;
    }
    case SyntheticEvaluatorMode::Plateau: {
      const int t = std::clamp(options_.plateau_total, 1, 10);
      for (auto d : ScoreBreakdown::dimensions()) dims[std::string(d)] = t;
      break;
    }
    case SyntheticEvaluatorMode::TargetDistance: {
      const int t = target_total(outline, options_.target_sequence);
      for (auto d : ScoreBreakdown::dimensions()) dims[std::string(d)] = t;
      break;
    }
  }
  return ScoreBreakdown::from_scores(std::move(dims));
}

std::size_t SyntheticProvider::screen(const std::vector<std::string>& candidates,
                                      ScreeningStage stage) {
  counts_.bump("screen");
  if (candidates.empty()) return 0;
  HashStream h;
  h.add(options_.seed).add("screen").add(stage == ScreeningStage::Conflict ? "conflict"
                                                                           : "climax");
  for (const auto& c : candidates) h.add(c);
  const auto pick = static_cast<std::size_t>(mix64(h.digest()) % candidates.size());
  last_raw_ = nlohmann::json({{"best", pick + 1}}).dump();
  return pick;
}

std::vector<std::string> SyntheticProvider::conflict_candidates(const Theme& theme, int n) {
  counts_.bump("conflict");
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t h = HashStream().add(options_.seed).add("conflict").add(theme.text)
                                .add(static_cast<std::uint64_t>(i)).digest();
    out.push_back("Core conflict " + std::to_string(i + 1) + " for theme '" + theme.text +
                  "' [" + hex64(h).substr(0, 8) + "]");
  }
  last_raw_ = nlohmann::json({{"candidates", out}}).dump();
  return out;
}

std::vector<std::string> SyntheticProvider::climax_candidates(const Theme& theme,
                                                              const std::string& conflict,
                                                              int n) {
  counts_.bump("climax");
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t h = HashStream().add(options_.seed).add("climax").add(theme.text)
                                .add(conflict).add(static_cast<std::uint64_t>(i)).digest();
    out.push_back("Climax scene " + std::to_string(i + 1) + " [" + hex64(h).substr(0, 8) +
                  "] resolving: " + conflict);
  }
  last_raw_ = nlohmann::json({{"candidates", out}}).dump();
  return out;
}

Bookends SyntheticProvider::generate_bookends(const Outline& outline) {
  counts_.bump("bookends");
  const std::string tag = hex64(outline_digest(outline, options_.seed)).substr(0, 8);
  return Bookends{
      "Opening scene [" + tag + "] introducing the world of '" + theme_.text + "'",
      "Closing scene [" + tag + "] settling the aftermath of '" + theme_.text + "'",
  };
}

std::vector<EditOp> SyntheticProvider::critique_outline(const Outline& outline) {
  counts_.bump("critique");
  // The synthetic self-critic approves the outline as-is.
  std::vector<EditOp> ops;
  for (std::size_t i = 0; i < outline.size(); ++i) {
    ops.push_back(EditOp{EditOp::Kind::Keep, static_cast<int>(i), 0, ""});
  }
  return ops;
}

std::string SyntheticProvider::fiction_segment(const StagedOutline& outline,
                                               FictionSegment segment) {
  counts_.bump("segment");
  const std::uint64_t h = HashStream()
                              .add(outline_digest(outline.outline, options_.seed))
                              .add(to_string(segment))
                              .digest();
  SplitMix64 rng(h);
  std::string text = "[" + std::string(to_string(segment)) + " of '" + theme_.text + "'] ";
  const std::size_t sentences = 2 + rng.below(3);
  for (std::size_t i = 0; i < sentences; ++i) {
    text += "Passage " + hex64(rng.next()).substr(0, 10) + " unfolds. ";
  }
  text += "\n";
  return text;
}

DirectOutlineResponse SyntheticProvider::direct_outline(const std::string& conflict,
                                                        const std::string& climax) {
  counts_.bump("direct");
  const std::uint64_t base =
      HashStream().add(options_.seed).add("direct").add(conflict).add(climax).digest();
  DirectOutlineResponse out;
  const int n = 4;
  for (int i = 0; i < n; ++i) {
    out.events.push_back("direct-plot-" +
                         hex64(fnv1a64(static_cast<std::uint64_t>(i), base)).substr(0, 12));
  }
  out.climax_position = static_cast<int>(mix64(base) % static_cast<std::uint64_t>(n + 1));
  return out;
}

// ---------------------------------------------------------------- judges ---

namespace {

std::size_t argmax_length(const std::vector<std::string>& texts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < texts.size(); ++i) {
    if (texts[i].size() > texts[best].size()) best = i;
  }
  return best;
}

std::size_t argmin_length(const std::vector<std::string>& texts) {
  std::size_t worst = 0;
  for (std::size_t i = 1; i < texts.size(); ++i) {
    if (texts[i].size() < texts[worst].size()) worst = i;
  }
  return worst;
}

}  // namespace

Judgment LongestWinsJudge::judge_comparative(const std::vector<std::string>& fictions,
                                             const std::vector<std::string>& dimensions,
                                             bool include_worst) {
  Judgment j;
  const std::size_t best = argmax_length(fictions);
  const std::size_t worst = argmin_length(fictions);
  for (const auto& d : dimensions) {
    j.best[d] = best;
    if (include_worst) j.worst[d] = worst;
  }
  j.raw_response = "synthetic:longest-wins";
  return j;
}

Judgment PositionBiasedJudge::judge_comparative(const std::vector<std::string>& fictions,
                                                const std::vector<std::string>& dimensions,
                                                bool include_worst) {
  Judgment j;
  for (const auto& d : dimensions) {
    j.best[d] = 0;
    if (include_worst) j.worst[d] = fictions.size() - 1;
  }
  j.raw_response = "synthetic:position-biased";
  return j;
}

Judgment SeededJudge::judge_comparative(const std::vector<std::string>& fictions,
                                        const std::vector<std::string>& dimensions,
                                        bool include_worst) {
  Judgment j;
  for (const auto& d : dimensions) {
    // Hash of the text multiset, not of positions: the pick follows the
    // fiction wherever the permutation puts it.
    std::size_t best = 0;
    std::size_t worst = 0;
    std::uint64_t best_key = 0;
    std::uint64_t worst_key = ~0ull;
    for (std::size_t i = 0; i < fictions.size(); ++i) {
      const std::uint64_t key = HashStream().add(seed_).add(d).add(fictions[i]).digest();
      if (key > best_key) {
        best_key = key;
        best = i;
      }
      if (key < worst_key) {
        worst_key = key;
        worst = i;
      }
    }
    j.best[d] = best;
    if (include_worst) j.worst[d] = worst;
  }
  j.raw_response = "synthetic:seeded";
  return j;
}

}  // namespace bitmcts
