#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "bitmcts/narrative.hpp"
#include "bitmcts/providers.hpp"

namespace bitmcts {

// ---------------------------------------------------------------------------
// Climax-anchored bidirectional MCTS over plot-event sequences.
//
// One phase grows outlines in a single direction from its root: selection by
// UCB, expansion from a per-node cached candidate list (one proposer call per
// node, ever), guided simulation with early termination, and additive
// backpropagation. The bidirectional schedule runs a forward phase from the
// climax, then re-roots on its best outline and runs a backward phase.
//
// A tree is mutated by exactly one logical thread; independent phases may run
// in parallel when their providers tolerate concurrent invocation.
// ---------------------------------------------------------------------------

struct SearchConfig {
  double exploration_c = 0.5;
  int iterations = 50;
  int d_max = 8;   // maximum search depth per phase
  int s_max = 3;   // maximum simulation steps
  int k_max = 4;   // candidate budget per expansion
  std::uint64_t seed = 0;
  Direction direction = Direction::Forward;
  // Guided-simulation acceptance rule. false = fixed-depth rollouts that
  // accept every sample (the no-early-stop ablation).
  bool early_stopping = true;
};

struct SearchNode {
  explicit SearchNode(Outline o) : outline(std::move(o)) {}

  Outline outline;
  SearchNode* parent = nullptr;
  std::vector<std::unique_ptr<SearchNode>> children;
  int depth = 0;              // root = 0; events beyond the phase root
  int visits = 0;             // N
  double total_return = 0.0;  // W
  double plot_reward = 0.0;   // rho, cached at creation, never recomputed
  bool terminal = false;      // tau, set only once depth reaches d_max
  bool fully_expanded = false;  // chi
  std::optional<std::vector<PlotEvent>> cached_extensions;  // Pi
  std::size_t next_extension = 0;  // index of the first unused candidate
  std::uint64_t creation_index = 0;
};

struct SearchResult {
  Outline best_outline;
  double best_reward = 0.0;
  std::unique_ptr<SearchNode> tree_root;
  int iterations_run = 0;
  std::map<std::string, std::int64_t> provider_call_counts;  // propose/sample/score deltas
  bool complete = true;  // false when provider exhaustion aborted the phase

  SearchResult() : best_outline(Outline::root(PlotEvent{"-", "-", EventOrigin::Climax})) {}
};

// UCB(u) = W/N + c * sqrt(2 ln N(parent) / N). Requires N >= 1 on both ends;
// selection only ever descends fully expanded nodes, whose children all
// carry at least one backpropagated visit.
double ucb_score(const SearchNode& child, int parent_visits, double c);

// One MCTS phase over a fixed root outline and direction.
class SearchTree {
 public:
  SearchTree(Outline root_outline, SearchConfig config, Proposer& proposer,
             Evaluator& evaluator);

  // Greedy-UCB descent; stops at the first terminal, not-fully-expanded, or
  // childless node. Ties break to the earliest-created child.
  SearchNode* select_leaf();

  // Instantiates exactly one child from the leaf's cached candidate list,
  // fetching the list on first expansion. Returns nullptr when no admissible
  // candidate remains (the leaf is then marked fully expanded).
  SearchNode* expand(SearchNode& leaf);

  // Guided simulation with early termination; returns the rollout reward.
  // Rollout extensions never enter the tree.
  double simulate(SearchNode& node);

  // N += 1, W += reward for every node on the root-to-node path.
  static void backpropagate(const std::vector<SearchNode*>& path, double reward);

  // Runs config.iterations full iterations and extracts the best outline:
  // over all nodes with N >= 1, maximize rho; ties prefer greater depth,
  // then earlier creation.
  SearchResult run();

  SearchNode& root() { return *root_; }
  const SearchConfig& config() const { return config_; }
  std::vector<SearchNode*> path_from_root(SearchNode& node) const;

 private:
  bool candidate_admissible(const SearchNode& leaf, const PlotEvent& candidate) const;
  Outline extend(const Outline& outline, PlotEvent event) const;

  SearchConfig config_;
  Proposer& proposer_;
  Evaluator& evaluator_;
  std::unique_ptr<SearchNode> root_;
  std::uint64_t next_creation_index_ = 1;
};

// Convenience wrapper: build a tree, run it, return the result. When
// `counts` is given, the propose/sample/score deltas incurred by this phase
// land in SearchResult::provider_call_counts.
SearchResult run_phase(const Outline& root_outline, const SearchConfig& config,
                       Proposer& proposer, Evaluator& evaluator,
                       CallCounts* counts = nullptr);

struct BidirectionalResult {
  Outline outline;
  SearchResult first_phase;   // as scheduled (forward unless order-swapped)
  SearchResult second_phase;
  BidirectionalResult()
      : outline(Outline::root(PlotEvent{"-", "-", EventOrigin::Climax})) {}
};

// Forward phase from [e*], then backward phase re-rooted on the forward
// best. `swap_order` runs backward first (the order-swapped ablation).
BidirectionalResult bidirectional_search(const PlotEvent& climax,
                                         const SearchConfig& forward_config,
                                         const SearchConfig& backward_config,
                                         Proposer& proposer, Evaluator& evaluator,
                                         bool swap_order = false,
                                         CallCounts* counts = nullptr);

// Tree dump mirroring SearchNode fields; children nested, parent omitted.
// Alphabetical key order keeps golden bytes stable.
nlohmann::json tree_to_json(const SearchNode& node);
nlohmann::json search_result_to_json(const SearchResult& result, const SearchConfig& config);

}  // namespace bitmcts
