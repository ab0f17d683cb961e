// Python bindings for the core search and pipeline operations. Structured
// results cross the boundary as JSON strings; the package wrapper decodes
// them into plain dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bitmcts/baselines.hpp"
#include "bitmcts/engine.hpp"
#include "bitmcts/errors.hpp"
#include "bitmcts/eval.hpp"
#include "bitmcts/rng.hpp"
#include "bitmcts/pipeline.hpp"
#include "bitmcts/synthetic.hpp"

namespace py = pybind11;
using namespace bitmcts;

namespace {

SyntheticEvaluatorMode evaluator_mode(const std::string& name) {
  if (name == "hashed") return SyntheticEvaluatorMode::Hashed;
  if (name == "length-monotone") return SyntheticEvaluatorMode::LengthMonotone;
  if (name == "length-decreasing") return SyntheticEvaluatorMode::LengthDecreasing;
  if (name == "plateau") return SyntheticEvaluatorMode::Plateau;
  if (name == "target-distance") return SyntheticEvaluatorMode::TargetDistance;
  throw ConfigError("unknown synthetic evaluator mode: " + name);
}

PlotEvent climax_event(const std::string& text) {
  EventIdGenerator ids(fnv1a64(text));
  return PlotEvent{ids.next(), text, EventOrigin::Climax};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Climax-anchored bidirectional MCTS over plot outlines";

  py::register_exception<Error>(m, "BitMctsError");

  py::class_<SearchConfig>(m, "SearchConfig")
      .def(py::init<>())
      .def_readwrite("exploration_c", &SearchConfig::exploration_c)
      .def_readwrite("iterations", &SearchConfig::iterations)
      .def_readwrite("d_max", &SearchConfig::d_max)
      .def_readwrite("s_max", &SearchConfig::s_max)
      .def_readwrite("k_max", &SearchConfig::k_max)
      .def_readwrite("seed", &SearchConfig::seed)
      .def_readwrite("early_stopping", &SearchConfig::early_stopping);

  py::class_<SyntheticProvider>(m, "SyntheticProvider")
      .def(py::init([](std::uint64_t seed, const std::string& evaluator,
                       bool stochastic_sampling) {
             SyntheticOptions options;
             options.seed = seed;
             options.evaluator = evaluator_mode(evaluator);
             options.stochastic_sampling = stochastic_sampling;
             return std::make_unique<SyntheticProvider>(options);
           }),
           py::arg("seed") = 0, py::arg("evaluator") = "hashed",
           py::arg("stochastic_sampling") = false)
      .def("call_counts", [](const SyntheticProvider& p) {
        py::dict counts;
        for (const auto& [key, value] : p.counts().snapshot()) {
          counts[py::str(key)] = value;
        }
        return counts;
      });

  m.def(
      "ucb_score",
      [](double total_return, int visits, int parent_visits, double c) {
        SearchNode node(Outline::root(PlotEvent{"n", "n", EventOrigin::Climax}));
        node.visits = visits;
        node.total_return = total_return;
        return ucb_score(node, parent_visits, c);
      },
      py::arg("total_return"), py::arg("visits"), py::arg("parent_visits"), py::arg("c"),
      "UCT acquisition value for a child with the given statistics");

  m.def(
      "run_phase_json",
      [](const std::string& climax_text, const SearchConfig& config, bool backward,
         SyntheticProvider& provider) {
        SearchConfig cfg = config;
        cfg.direction = backward ? Direction::Backward : Direction::Forward;
        const SearchResult result =
            run_phase(Outline::root(climax_event(climax_text)), cfg, provider, provider,
                      &provider.counts());
        return search_result_to_json(result, cfg).dump();
      },
      py::arg("climax_text"), py::arg("config"), py::arg("backward"), py::arg("provider"),
      "One MCTS phase; returns the tree dump as a JSON string");

  m.def(
      "bidirectional_search_json",
      [](const std::string& climax_text, const SearchConfig& forward,
         const SearchConfig& backward, SyntheticProvider& provider, bool swap_order) {
        const BidirectionalResult result = bidirectional_search(
            climax_event(climax_text), forward, backward, provider, provider, swap_order);
        return to_json(result.outline).dump();
      },
      py::arg("climax_text"), py::arg("forward"), py::arg("backward"), py::arg("provider"),
      py::arg("swap_order") = false,
      "Forward-then-backward search; returns the outline as a JSON string");

  m.def(
      "stage_partition_json",
      [](const std::string& outline_json) {
        const Outline outline = outline_from_json(nlohmann::json::parse(outline_json));
        return to_json(stage_partition(outline)).dump();
      },
      py::arg("outline_json"), "Five-stage dramatic labels for an outline JSON document");

  m.def(
      "run_pipeline_json",
      [](const std::string& theme_text, const std::string& theme_id,
         const SearchConfig& forward, const SearchConfig& backward,
         SyntheticProvider& provider, const std::string& strategy, bool refinement,
         const std::string& run_dir) {
        PipelineOptions options;
        options.forward = forward;
        options.backward = backward;
        options.strategy.kind = strategy_kind_from_string(strategy);
        options.refinement_enabled = refinement;
        options.run_dir = run_dir;
        const FictionArtifact artifact =
            run_pipeline(make_theme(theme_id, theme_text), options, provider);
        nlohmann::json summary{
            {"full_text", artifact.full_text},
            {"metadata", artifact.metadata},
            {"refined_outline", to_json(artifact.refined_outline)},
            {"rough_outline", to_json(artifact.rough_outline)},
        };
        return summary.dump();
      },
      py::arg("theme_text"), py::arg("theme_id"), py::arg("forward"), py::arg("backward"),
      py::arg("provider"), py::arg("strategy") = "bit-mcts", py::arg("refinement") = true,
      py::arg("run_dir") = "",
      "Full theme-to-fiction pipeline; returns an artifact summary JSON string");

  m.def("count_codepoints",
        [](const std::string& text) { return count_codepoints(text); });
  m.def("count_whitespace_tokens",
        [](const std::string& text) { return count_whitespace_tokens(text); });

  m.attr("__version__") = "0.1.0";
}
