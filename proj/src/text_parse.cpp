#include "bitmcts/text_parse.hpp"

#include <algorithm>
#include <cctype>

#include "bitmcts/errors.hpp"
#include "bitmcts/logging.hpp"

namespace bitmcts {

nlohmann::json extract_json_object(const std::string& text) {
  // Scan for candidate opening braces; accept the first span that both
  // balances and parses. Braces inside string literals do not count.
  for (std::size_t start = 0; start < text.size(); ++start) {
    if (text[start] != '{') continue;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          const auto candidate = text.substr(start, i - start + 1);
          auto parsed = nlohmann::json::parse(candidate, nullptr, false);
          if (!parsed.is_discarded()) return parsed;
          break;  // balanced but unparseable; try the next opening brace
        }
      }
    }
  }
  throw ParseError("no balanced JSON object found in response");
}

std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size());
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (tpl[i] != '{') {
      out.push_back(tpl[i]);
      continue;
    }
    const std::size_t close = tpl.find('}', i);
    if (close == std::string::npos) {
      out.append(tpl, i, std::string::npos);
      break;
    }
    const std::string name = tpl.substr(i + 1, close - i - 1);
    const bool is_placeholder =
        !name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char c) {
          return std::isalnum(c) || c == '_';
        });
    if (!is_placeholder) {
      // Literal braces (JSON examples inside prompts) pass through.
      out.push_back(tpl[i]);
      continue;
    }
    const auto it = values.find(name);
    if (it == values.end()) {
      throw ConfigError("prompt template references unknown placeholder {" + name + "}");
    }
    out.append(it->second);
    i = close;
  }
  return out;
}

std::size_t longest_common_substring(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
        best = std::max(best, cur[j]);
      } else {
        cur[j] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

namespace {

std::optional<long> trailing_ordinal(const std::string& s) {
  std::size_t end = s.size();
  while (end > 0 && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(s[begin - 1]))) --begin;
  if (begin == end || end - begin > 6) return std::nullopt;
  return std::stol(s.substr(begin, end - begin));
}

}  // namespace

std::size_t resolve_choice(const nlohmann::json& value,
                           const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw ParseError("no candidates to resolve a choice against");

  if (value.is_number_integer()) {
    const long n = value.get<long>();
    if (n >= 1 && n <= static_cast<long>(candidates.size())) {
      return static_cast<std::size_t>(n - 1);
    }
    throw ParseError("choice ordinal out of range: " + std::to_string(n));
  }
  if (!value.is_string()) throw ParseError("choice value is neither string nor integer");
  const std::string text = value.get<std::string>();

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] == text) return i;
  }
  if (const auto ordinal = trailing_ordinal(text)) {
    if (*ordinal >= 1 && *ordinal <= static_cast<long>(candidates.size())) {
      return static_cast<std::size_t>(*ordinal - 1);
    }
  }
  // Fuzzy fallback: the quoted text usually is a near-verbatim candidate.
  std::size_t best = candidates.size();
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t len = longest_common_substring(text, candidates[i]);
    if (len > best_len) {
      best_len = len;
      best = i;
    }
  }
  if (best == candidates.size() || best_len < 3) {
    throw ParseError("unresolvable choice value: " + text);
  }
  return best;
}

namespace {

std::string normalize_key(const std::string& key) {
  std::string out;
  bool last_sep = true;
  for (unsigned char c : key) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
      last_sep = false;
    } else if (!last_sep) {
      out.push_back('_');
      last_sep = true;
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

// Accepted spellings per canonical dimension, normalized form.
const std::map<std::string, std::vector<std::string>>& dimension_aliases() {
  static const std::map<std::string, std::vector<std::string>> aliases = {
      {"character_development", {"character_development", "character"}},
      {"setting", {"setting", "setting_description"}},
      {"consistency", {"consistency"}},
      {"relatedness", {"relatedness"}},
      {"causal_temporal",
       {"causal_temporal", "causal_and_temporal_relationship", "causal_temporal_relationship"}},
      {"theme", {"theme", "theme_exploration"}},
      {"readability", {"readability", "readible", "readable"}},
      {"creativity", {"creativity"}},
      {"major_flaws", {"major_flaws", "identifying_major_flaws", "identification_of_major_flaws"}},
      {"overall_quality", {"overall_quality", "overall"}},
  };
  return aliases;
}

}  // namespace

ScoreBreakdown parse_score_response(const std::string& raw) {
  const nlohmann::json j = extract_json_object(raw);
  std::map<std::string, int> normalized;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) continue;
    normalized[normalize_key(key)] = static_cast<int>(value.get<double>());
  }
  std::map<std::string, int> scores;
  for (auto dim : ScoreBreakdown::dimensions()) {
    bool found = false;
    for (const auto& alias : dimension_aliases().at(std::string(dim))) {
      const auto it = normalized.find(alias);
      if (it != normalized.end()) {
        scores[std::string(dim)] = it->second;
        found = true;
        break;
      }
    }
    if (!found) {
      throw ParseError("evaluator response missing dimension: " + std::string(dim));
    }
  }
  return ScoreBreakdown::from_scores(std::move(scores));
}

std::vector<std::string> parse_events_response(const std::string& raw, std::size_t max_events) {
  const nlohmann::json j = extract_json_object(raw);
  const auto it = j.find("events");
  if (it == j.end() || !it->is_array()) {
    throw ParseError("propose response has no \"events\" array");
  }
  std::vector<std::string> events;
  for (const auto& e : *it) {
    if (events.size() >= max_events) break;
    if (e.is_string() && !e.get<std::string>().empty()) {
      events.push_back(e.get<std::string>());
    }
  }
  if (events.empty()) throw ParseError("propose response contained no usable events");
  return events;
}

std::string parse_plot_response(const std::string& raw) {
  const nlohmann::json j = extract_json_object(raw);
  const auto it = j.find("plot");
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw ParseError("plot response has no non-empty \"plot\" field");
  }
  return it->get<std::string>();
}

std::vector<std::string> parse_candidate_set(const std::string& raw) {
  const nlohmann::json j = extract_json_object(raw);
  std::vector<std::string> out;
  if (const auto it = j.find("events"); it != j.end() && it->is_array()) {
    for (const auto& e : *it) {
      if (e.is_string() && !e.get<std::string>().empty()) out.push_back(e.get<std::string>());
    }
    return out;
  }
  // plotN keys, ordered by N.
  std::vector<std::pair<long, std::string>> numbered;
  for (const auto& [key, value] : j.items()) {
    const auto norm = normalize_key(key);
    if (norm.rfind("plot", 0) != 0 || !value.is_string()) continue;
    const auto ordinal = trailing_ordinal(key);
    if (!ordinal.has_value()) continue;
    if (value.get<std::string>().empty()) {
      log_warn("candidate " + key + " is empty, skipping");
      continue;
    }
    numbered.emplace_back(*ordinal, value.get<std::string>());
  }
  std::sort(numbered.begin(), numbered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [n, text] : numbered) out.push_back(std::move(text));
  return out;
}

Bookends parse_bookends_response(const std::string& raw) {
  const nlohmann::json j = extract_json_object(raw);
  if (!j.contains("opening") || !j.contains("closing") || !j["opening"].is_string() ||
      !j["closing"].is_string()) {
    throw ParseError("bookends response must carry \"opening\" and \"closing\" strings");
  }
  Bookends b{j["opening"].get<std::string>(), j["closing"].get<std::string>()};
  if (b.opening.empty() || b.closing.empty()) {
    throw ParseError("bookends must be non-empty");
  }
  return b;
}

std::vector<EditOp> parse_edit_script(const std::string& raw) {
  const nlohmann::json j = extract_json_object(raw);
  const auto it = j.find("operations");
  if (it == j.end() || !it->is_array()) {
    throw ParseError("edit script has no \"operations\" array");
  }
  std::vector<EditOp> ops;
  for (const auto& entry : *it) {
    if (!entry.is_object() || !entry.contains("op")) {
      throw ParseError("edit operation must be an object with an \"op\" field");
    }
    const std::string op = entry["op"].get<std::string>();
    EditOp out;
    if (op == "keep") {
      out.kind = EditOp::Kind::Keep;
      out.index = entry.at("index").get<int>();
    } else if (op == "move") {
      out.kind = EditOp::Kind::Move;
      out.index = entry.at("index").get<int>();
      out.to = entry.at("to").get<int>();
    } else if (op == "insert") {
      out.kind = EditOp::Kind::Insert;
      out.index = entry.at("at").get<int>();
      out.text = entry.at("text").get<std::string>();
      if (out.text.empty()) throw ParseError("insert operation with empty text");
    } else if (op == "delete") {
      out.kind = EditOp::Kind::Delete;
      out.index = entry.at("index").get<int>();
    } else {
      throw ParseError("unknown edit operation: " + op);
    }
    ops.push_back(std::move(out));
  }
  return ops;
}

DirectOutlineResponse parse_direct_outline(const std::string& raw) {
  const nlohmann::json j = extract_json_object(raw);
  DirectOutlineResponse out;
  const auto it = j.find("events");
  if (it == j.end() || !it->is_array()) {
    throw ParseError("direct outline response has no \"events\" array");
  }
  for (const auto& e : *it) {
    if (e.is_string() && !e.get<std::string>().empty()) out.events.push_back(e.get<std::string>());
  }
  if (out.events.size() < 2) {
    throw ParseError("direct outline needs at least two events besides the climax");
  }
  out.climax_position = j.value("climax_position", static_cast<int>(out.events.size() / 2));
  out.climax_position =
      std::clamp(out.climax_position, 0, static_cast<int>(out.events.size()));
  return out;
}

Judgment parse_judgment(const std::string& raw, const std::vector<std::string>& labels,
                        const std::vector<std::string>& fictions,
                        const std::vector<std::string>& dimensions, bool include_worst) {
  const nlohmann::json j = extract_json_object(raw);
  Judgment out;
  out.raw_response = raw;

  const auto resolve_pick = [&](const nlohmann::json& value) -> std::size_t {
    // Labels ("A", "B"...) take precedence; fall back to fiction texts.
    if (value.is_string()) {
      const std::string s = value.get<std::string>();
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == s) return i;
      }
    }
    try {
      return resolve_choice(value, labels);
    } catch (const ParseError&) {
      return resolve_choice(value, fictions);
    }
  };

  const auto read_section = [&](const char* section,
                                std::map<std::string, std::size_t>& into) {
    const auto sec = j.find(section);
    if (sec == j.end() || !sec->is_object()) {
      throw ParseError(std::string("judge response missing \"") + section + "\" object");
    }
    std::map<std::string, nlohmann::json> normalized;
    for (const auto& [key, value] : sec->items()) normalized[normalize_key(key)] = value;
    for (const auto& dim : dimensions) {
      const auto it = normalized.find(normalize_key(dim));
      if (it == normalized.end()) {
        throw ParseError("judge response missing dimension: " + dim);
      }
      into[dim] = resolve_pick(it->second);
    }
  };

  read_section("best", out.best);
  if (include_worst) read_section("worst", out.worst);
  return out;
}

}  // namespace bitmcts
