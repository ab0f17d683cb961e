#include "bitmcts/narrative.hpp"

#include <algorithm>
#include <cctype>

#include "bitmcts/errors.hpp"
#include "bitmcts/rng.hpp"

namespace bitmcts {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Theme make_theme(std::string id, std::string text) {
  if (trim(text).empty()) throw InvariantError("theme text must be non-empty");
  return Theme{std::move(id), std::move(text)};
}

std::string_view to_string(EventOrigin origin) {
  switch (origin) {
    case EventOrigin::Climax: return "climax";
    case EventOrigin::ForwardSearch: return "forward-search";
    case EventOrigin::BackwardSearch: return "backward-search";
    case EventOrigin::Simulation: return "simulation";
    case EventOrigin::RefinementOpening: return "refinement-opening";
    case EventOrigin::RefinementClosing: return "refinement-closing";
    case EventOrigin::RefinementEdit: return "refinement-edit";
  }
  return "forward-search";
}

EventOrigin event_origin_from_string(std::string_view s) {
  if (s == "climax") return EventOrigin::Climax;
  if (s == "forward-search") return EventOrigin::ForwardSearch;
  if (s == "backward-search") return EventOrigin::BackwardSearch;
  if (s == "simulation") return EventOrigin::Simulation;
  if (s == "refinement-opening") return EventOrigin::RefinementOpening;
  if (s == "refinement-closing") return EventOrigin::RefinementClosing;
  if (s == "refinement-edit") return EventOrigin::RefinementEdit;
  throw InvariantError("unknown event origin: " + std::string(s));
}

std::string EventIdGenerator::next() {
  // SplitMix64 is a bijection on uint64, so distinct counters cannot collide
  // under one seed.
  SplitMix64 rng(seed_ ^ (counter_ * 0x9E3779B97F4A7C15ull));
  ++counter_;
  return hex64(rng.next());
}

std::string normalize_event_text(std::string_view text) {
  std::string out = trim(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Outline::Outline(std::vector<PlotEvent> events, std::size_t climax_index)
    : events_(std::move(events)), climax_index_(climax_index) {
  if (events_.empty()) throw InvariantError("outline must contain at least one event");
  if (climax_index_ >= events_.size()) throw InvariantError("climax index out of range");
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].text.empty()) throw InvariantError("outline event text must be non-empty");
    for (std::size_t j = i + 1; j < events_.size(); ++j) {
      if (events_[i].id == events_[j].id) {
        throw InvariantError("duplicate event id in outline: " + events_[i].id);
      }
    }
  }
}

Outline Outline::root(PlotEvent climax) {
  std::vector<PlotEvent> events;
  events.push_back(std::move(climax));
  return Outline(std::move(events), 0);
}

Outline Outline::from_parts(std::vector<PlotEvent> events, std::size_t climax_index) {
  return Outline(std::move(events), climax_index);
}

Outline Outline::appended(PlotEvent e) const {
  if (contains_id(e.id)) throw InvariantError("append rejected, duplicate event id: " + e.id);
  std::vector<PlotEvent> events = events_;
  events.push_back(std::move(e));
  return Outline(std::move(events), climax_index_);
}

Outline Outline::prepended(PlotEvent e) const {
  if (contains_id(e.id)) throw InvariantError("prepend rejected, duplicate event id: " + e.id);
  std::vector<PlotEvent> events;
  events.reserve(events_.size() + 1);
  events.push_back(std::move(e));
  events.insert(events.end(), events_.begin(), events_.end());
  return Outline(std::move(events), climax_index_ + 1);
}

bool Outline::contains_id(std::string_view id) const {
  return std::any_of(events_.begin(), events_.end(),
                     [&](const PlotEvent& e) { return e.id == id; });
}

bool Outline::contains_normalized_text(std::string_view text) const {
  const std::string needle = normalize_event_text(text);
  return std::any_of(events_.begin(), events_.end(), [&](const PlotEvent& e) {
    return normalize_event_text(e.text) == needle;
  });
}

bool Outline::operator==(const Outline& other) const {
  if (climax_index_ != other.climax_index_ || events_.size() != other.events_.size()) return false;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].id != other.events_[i].id || events_[i].text != other.events_[i].text ||
        events_[i].origin != other.events_[i].origin) {
      return false;
    }
  }
  return true;
}

StagedOutline stage_partition(const Outline& outline) {
  const auto& events = outline.events();
  const std::size_t climax = outline.climax_index();
  std::vector<StageLabel> labels(events.size(), StageLabel::RisingAction);

  labels[climax] = StageLabel::Climax;
  for (std::size_t i = 0; i < climax; ++i) labels[i] = StageLabel::RisingAction;
  for (std::size_t i = climax + 1; i < events.size(); ++i) labels[i] = StageLabel::FallingAction;

  if (climax > 0 && events.front().origin == EventOrigin::RefinementOpening) {
    labels.front() = StageLabel::Exposition;
  }
  if (climax + 1 < events.size() && events.back().origin == EventOrigin::RefinementClosing) {
    labels.back() = StageLabel::Resolution;
  }
  return StagedOutline{outline, std::move(labels)};
}

std::string_view to_string(StageLabel label) {
  switch (label) {
    case StageLabel::Exposition: return "exposition";
    case StageLabel::RisingAction: return "rising-action";
    case StageLabel::Climax: return "climax";
    case StageLabel::FallingAction: return "falling-action";
    case StageLabel::Resolution: return "resolution";
  }
  return "rising-action";
}

StageLabel stage_label_from_string(std::string_view s) {
  if (s == "exposition") return StageLabel::Exposition;
  if (s == "rising-action") return StageLabel::RisingAction;
  if (s == "climax") return StageLabel::Climax;
  if (s == "falling-action") return StageLabel::FallingAction;
  if (s == "resolution") return StageLabel::Resolution;
  throw InvariantError("unknown stage label: " + std::string(s));
}

nlohmann::json to_json(const PlotEvent& event) {
  return nlohmann::json{
      {"id", event.id},
      {"origin", std::string(to_string(event.origin))},
      {"text", event.text},
  };
}

nlohmann::json to_json(const Outline& outline) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : outline.events()) events.push_back(to_json(e));
  return nlohmann::json{
      {"climax_index", outline.climax_index()},
      {"events", std::move(events)},
  };
}

nlohmann::json to_json(const StagedOutline& staged) {
  nlohmann::json labels = nlohmann::json::array();
  for (auto l : staged.stage_labels) labels.push_back(std::string(to_string(l)));
  return nlohmann::json{
      {"outline", to_json(staged.outline)},
      {"stage_labels", std::move(labels)},
  };
}

PlotEvent plot_event_from_json(const nlohmann::json& j) {
  return PlotEvent{
      j.at("id").get<std::string>(),
      j.at("text").get<std::string>(),
      event_origin_from_string(j.at("origin").get<std::string>()),
  };
}

Outline outline_from_json(const nlohmann::json& j) {
  std::vector<PlotEvent> events;
  for (const auto& e : j.at("events")) events.push_back(plot_event_from_json(e));
  return Outline::from_parts(std::move(events), j.at("climax_index").get<std::size_t>());
}

StagedOutline staged_outline_from_json(const nlohmann::json& j) {
  StagedOutline staged{outline_from_json(j.at("outline")), {}};
  for (const auto& l : j.at("stage_labels")) {
    staged.stage_labels.push_back(stage_label_from_string(l.get<std::string>()));
  }
  return staged;
}

}  // namespace bitmcts
