#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bitmcts/providers.hpp"
#include "json.hpp"

namespace bitmcts {

// Extracts the outermost balanced {...} object from LLM output (models wrap
// JSON in prose despite instructions) and parses it. String literals and
// escapes are respected during the scan. Throws ParseError when no balanced
// object parses.
nlohmann::json extract_json_object(const std::string& text);

// Fills {name} placeholders. Unknown placeholders in the template raise
// ConfigError so broken prompt files fail loudly, not silently.
std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& values);

// Resolves a screening pick ("best": ...) to a candidate index.
// Precedence: exact candidate text match; then a 1-based ordinal parsed from
// integers or trailing digits ("plot3", "3"); then fuzzy longest-common-
// substring against candidate texts. Throws ParseError when unresolvable.
std::size_t resolve_choice(const nlohmann::json& value,
                           const std::vector<std::string>& candidates);

// Longest common substring length (byte-wise); the fuzzy resolver metric.
std::size_t longest_common_substring(const std::string& a, const std::string& b);

// Parses the evaluator response into the ten canonical dimensions. Keys are
// matched after normalization (lowercase, non-alphanumerics collapsed to
// underscores), so "Character Development" and "character_development" both
// land. Missing dimensions throw ParseError.
ScoreBreakdown parse_score_response(const std::string& raw);

// Parses propose responses: {"events": [...]} candidate arrays or a single
// {"plot": "..."} object. Returns candidate texts, empty entries dropped.
std::vector<std::string> parse_events_response(const std::string& raw, std::size_t max_events);
std::string parse_plot_response(const std::string& raw);

// {"plot1": "...", "plot2": "..."} (or {"events": [...]}) candidate sets,
// in plotN order. Malformed entries are skipped; fewer-than-expected
// survivors are the caller's policy decision.
std::vector<std::string> parse_candidate_set(const std::string& raw);

// {"opening": "...", "closing": "..."}.
Bookends parse_bookends_response(const std::string& raw);

// {"operations": [{"op": "keep", "index": 0}, ...]}.
std::vector<EditOp> parse_edit_script(const std::string& raw);

// {"events": [...], "climax_position": n}.
DirectOutlineResponse parse_direct_outline(const std::string& raw);

// Judge response {"best": {dim: pick}, "worst": {dim: pick}} resolved
// against the presented fiction labels/texts.
Judgment parse_judgment(const std::string& raw, const std::vector<std::string>& labels,
                        const std::vector<std::string>& fictions,
                        const std::vector<std::string>& dimensions, bool include_worst);

}  // namespace bitmcts
