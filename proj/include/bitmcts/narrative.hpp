#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace bitmcts {

// ---------------------------------------------------------------------------
// Domain vocabulary shared by the whole system: themes, plot events, outlines
// anchored on a climax event, and the five-stage dramatic partition.
//
// Outlines are immutable values. Growing one returns a new outline; the two
// ends are independent, so appends never disturb the climax index and each
// prepend shifts it by exactly one.
// ---------------------------------------------------------------------------

struct Theme {
  std::string id;
  std::string text;  // the central artistic idea; non-empty after trimming
};

// Validates the non-empty-after-trim invariant; throws InvariantError.
Theme make_theme(std::string id, std::string text);

enum class EventOrigin {
  Climax,
  ForwardSearch,
  BackwardSearch,
  Simulation,
  RefinementOpening,
  RefinementClosing,
  RefinementEdit,
};

std::string_view to_string(EventOrigin origin);
EventOrigin event_origin_from_string(std::string_view s);

struct PlotEvent {
  std::string id;    // unique within one pipeline run
  std::string text;  // non-empty
  EventOrigin origin = EventOrigin::ForwardSearch;
};

// Mints run-unique, deterministic event ids (hex of a seeded counter hash).
// Identical texts minted twice stay distinct events.
class EventIdGenerator {
 public:
  explicit EventIdGenerator(std::uint64_t seed = 0) : seed_(seed) {}
  std::string next();

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Ordered event sequence with a climax anchor. Always non-empty; event ids
// pairwise distinct; 0 <= climax_index() < size().
class Outline {
 public:
  // Root outline [e*] containing only the climax anchor.
  static Outline root(PlotEvent climax);
  // Rebuilds an outline from parts (deserialization); revalidates invariants.
  static Outline from_parts(std::vector<PlotEvent> events, std::size_t climax_index);

  // Returns a copy with `e` appended; climax index unchanged.
  // Throws InvariantError if e.id already occurs.
  Outline appended(PlotEvent e) const;

  // Returns a copy with `e` prepended; climax index shifts up by one.
  // Throws InvariantError if e.id already occurs.
  Outline prepended(PlotEvent e) const;

  const std::vector<PlotEvent>& events() const { return events_; }
  std::size_t climax_index() const { return climax_index_; }
  const PlotEvent& climax() const { return events_[climax_index_]; }
  std::size_t size() const { return events_.size(); }

  bool contains_id(std::string_view id) const;
  // Case-folded, trimmed text membership; the engine's admissibility probe.
  bool contains_normalized_text(std::string_view text) const;

  bool operator==(const Outline& other) const;

 private:
  Outline(std::vector<PlotEvent> events, std::size_t climax_index);
  std::vector<PlotEvent> events_;
  std::size_t climax_index_ = 0;
};

enum class StageLabel {
  Exposition,
  RisingAction,
  Climax,
  FallingAction,
  Resolution,
};

std::string_view to_string(StageLabel label);
StageLabel stage_label_from_string(std::string_view s);

// Outline plus one dramatic stage label per event. Exactly one climax label,
// sitting at the climax index; pre-climax labels are exposition/rising only,
// post-climax labels falling/resolution only.
struct StagedOutline {
  Outline outline;
  std::vector<StageLabel> stage_labels;
};

// Deterministic positional labeling. The bookend labels (exposition,
// resolution) are reserved for refinement-produced events: the first
// pre-climax event is exposition only when its origin is refinement-opening,
// and the last post-climax event is resolution only when its origin is
// refinement-closing; every other pre/post event is rising/falling action.
StagedOutline stage_partition(const Outline& outline);

// Trimmed, ASCII-case-folded text used for duplicate-candidate checks.
std::string normalize_event_text(std::string_view text);

// --------------------------------------------------------------- JSON ------
// Outline schema: {"climax_index": int, "events": [{"id","origin","text"}]}.
// nlohmann::json orders keys alphabetically, which pins the byte layout the
// golden tests rely on.
nlohmann::json to_json(const PlotEvent& event);
nlohmann::json to_json(const Outline& outline);
nlohmann::json to_json(const StagedOutline& staged);
PlotEvent plot_event_from_json(const nlohmann::json& j);
Outline outline_from_json(const nlohmann::json& j);
StagedOutline staged_outline_from_json(const nlohmann::json& j);

}  // namespace bitmcts
