#include "bitmcts/engine.hpp"

#include <algorithm>
#include <cmath>

#include "bitmcts/errors.hpp"
#include "bitmcts/logging.hpp"

namespace bitmcts {

double ucb_score(const SearchNode& child, int parent_visits, double c) {
  if (child.visits < 1) {
    throw InvariantError("ucb_score requires at least one visit on the child");
  }
  if (parent_visits < 1) {
    throw InvariantError("ucb_score requires at least one visit on the parent");
  }
  const double exploit = child.total_return / static_cast<double>(child.visits);
  const double explore =
      c * std::sqrt(2.0 * std::log(static_cast<double>(parent_visits)) /
                    static_cast<double>(child.visits));
  return exploit + explore;
}

SearchTree::SearchTree(Outline root_outline, SearchConfig config, Proposer& proposer,
                       Evaluator& evaluator)
    : config_(config), proposer_(proposer), evaluator_(evaluator) {
  root_ = std::make_unique<SearchNode>(std::move(root_outline));
  // rho(root) is read unconditionally by the simulation, so it is computed
  // up front rather than lazily.
  root_->plot_reward = clamp_reward(evaluator_.score(root_->outline).total);
}

SearchNode* SearchTree::select_leaf() {
  SearchNode* node = root_.get();
  while (!node->terminal && node->fully_expanded && !node->children.empty()) {
    SearchNode* best = nullptr;
    double best_score = 0.0;
    for (const auto& child : node->children) {
      const double s = ucb_score(*child, node->visits, config_.exploration_c);
      if (best == nullptr || s > best_score) {  // strict >: ties keep creation order
        best = child.get();
        best_score = s;
      }
    }
    node = best;
  }
  return node;
}

bool SearchTree::candidate_admissible(const SearchNode& leaf, const PlotEvent& candidate) const {
  if (candidate.text.empty()) return false;
  if (leaf.outline.contains_normalized_text(candidate.text)) return false;
  const std::string needle = normalize_event_text(candidate.text);
  for (const auto& sibling : leaf.children) {
    // The event a child added sits at the grown end of its outline.
    const PlotEvent& added = config_.direction == Direction::Forward
                                 ? sibling->outline.events().back()
                                 : sibling->outline.events().front();
    if (normalize_event_text(added.text) == needle) return false;
  }
  return true;
}

Outline SearchTree::extend(const Outline& outline, PlotEvent event) const {
  return config_.direction == Direction::Forward ? outline.appended(std::move(event))
                                                 : outline.prepended(std::move(event));
}

SearchNode* SearchTree::expand(SearchNode& leaf) {
  if (leaf.terminal || leaf.fully_expanded) {
    throw InvariantError("expand called on a terminal or fully expanded node");
  }
  if (!leaf.cached_extensions.has_value()) {
    // The single proposer call this node will ever make.
    leaf.cached_extensions = proposer_.propose(
        ProposeRequest{leaf.outline, config_.direction, config_.k_max, 0});
    leaf.next_extension = 0;
  }
  auto& cached = *leaf.cached_extensions;
  while (leaf.next_extension < cached.size()) {
    PlotEvent candidate = cached[leaf.next_extension++];
    if (!candidate_admissible(leaf, candidate)) {
      log_debug("expansion_candidate_skipped", "{\"text\":\"duplicate\"}");
      continue;
    }
    auto child = std::make_unique<SearchNode>(extend(leaf.outline, std::move(candidate)));
    child->parent = &leaf;
    child->depth = leaf.depth + 1;
    child->plot_reward = clamp_reward(evaluator_.score(child->outline).total);
    child->creation_index = next_creation_index_++;
    if (leaf.next_extension == cached.size()) leaf.fully_expanded = true;
    leaf.children.push_back(std::move(child));
    return leaf.children.back().get();
  }
  leaf.fully_expanded = true;
  return nullptr;
}

double SearchTree::simulate(SearchNode& node) {
  if (node.terminal || node.depth >= config_.d_max) {
    node.terminal = true;
    return node.plot_reward;
  }
  double reward_cur = node.plot_reward;
  Outline current = node.outline;
  const int steps = std::min(config_.s_max, config_.d_max - node.depth);
  const std::size_t root_size = root_->outline.size();
  for (int i = 0; i < steps; ++i) {
    try {
      PlotEvent sample = proposer_.sample_extension(current, config_.direction, 0);
      Outline extended = extend(current, std::move(sample));
      // Depth of the rollout outline relative to the phase root.
      if (static_cast<int>(extended.size() - root_size) > config_.d_max) break;
      const double reward_new = clamp_reward(evaluator_.score(extended).total);
      // Accept only non-decreasing rewards; a rejected sample ends the
      // rollout without touching the node's terminal flag. The fixed-depth
      // variant accepts every sample.
      if (config_.early_stopping && reward_new < reward_cur) break;
      current = std::move(extended);
      reward_cur = reward_new;
    } catch (const ProviderError& e) {
      log_warn(std::string("rollout aborted mid-simulation: ") + e.what());
      break;
    }
  }
  return reward_cur;
}

void SearchTree::backpropagate(const std::vector<SearchNode*>& path, double reward) {
  for (SearchNode* node : path) {
    node->visits += 1;
    node->total_return += reward;
  }
}

std::vector<SearchNode*> SearchTree::path_from_root(SearchNode& node) const {
  std::vector<SearchNode*> path;
  for (SearchNode* n = &node; n != nullptr; n = n->parent) path.push_back(n);
  std::reverse(path.begin(), path.end());
  return path;
}

SearchResult SearchTree::run() {
  SearchResult result;
  int completed = 0;
  bool aborted = false;
  for (int i = 0; i < config_.iterations; ++i) {
    try {
      SearchNode* leaf = select_leaf();
      SearchNode* node = leaf;
      if (!leaf->terminal && !leaf->fully_expanded) {
        if (SearchNode* child = expand(*leaf)) node = child;
      }
      const double reward = simulate(*node);
      backpropagate(path_from_root(*node), reward);
      ++completed;
    } catch (const ProviderError& e) {
      log_warn(std::string("search phase aborted by provider failure: ") + e.what());
      aborted = true;
      break;
    }
  }

  // Extraction: maximize rho over visited nodes; deeper wins ties, then
  // earlier creation. Visit counts only steer exploration.
  SearchNode* best = nullptr;
  std::vector<SearchNode*> stack{root_.get()};
  while (!stack.empty()) {
    SearchNode* n = stack.back();
    stack.pop_back();
    for (const auto& c : n->children) stack.push_back(c.get());
    if (n->visits < 1) continue;
    if (best == nullptr || n->plot_reward > best->plot_reward ||
        (n->plot_reward == best->plot_reward &&
         (n->depth > best->depth ||
          (n->depth == best->depth && n->creation_index < best->creation_index)))) {
      best = n;
    }
  }
  if (best == nullptr) best = root_.get();  // zero completed iterations

  result.best_outline = best->outline;
  result.best_reward = best->plot_reward;
  result.iterations_run = completed;
  result.complete = !aborted;
  result.tree_root = std::move(root_);
  return result;
}

SearchResult run_phase(const Outline& root_outline, const SearchConfig& config,
                       Proposer& proposer, Evaluator& evaluator, CallCounts* counts) {
  std::map<std::string, std::int64_t> before;
  if (counts != nullptr) before = counts->snapshot();
  SearchTree tree(root_outline, config, proposer, evaluator);
  SearchResult result = tree.run();
  if (counts != nullptr) {
    for (const auto& [key, value] : counts->snapshot()) {
      const auto it = before.find(key);
      const std::int64_t delta = value - (it == before.end() ? 0 : it->second);
      if (key == "propose" || key == "sample" || key == "score") {
        result.provider_call_counts[key] = delta;
      }
    }
  }
  return result;
}

BidirectionalResult bidirectional_search(const PlotEvent& climax,
                                         const SearchConfig& forward_config,
                                         const SearchConfig& backward_config,
                                         Proposer& proposer, Evaluator& evaluator,
                                         bool swap_order, CallCounts* counts) {
  if (climax.text.empty()) throw InvariantError("climax event text must be non-empty");
  BidirectionalResult result;
  const Outline anchor = Outline::root(climax);

  SearchConfig first_cfg = swap_order ? backward_config : forward_config;
  SearchConfig second_cfg = swap_order ? forward_config : backward_config;
  first_cfg.direction = swap_order ? Direction::Backward : Direction::Forward;
  second_cfg.direction = swap_order ? Direction::Forward : Direction::Backward;

  result.first_phase = run_phase(anchor, first_cfg, proposer, evaluator, counts);
  // The second phase re-roots on the first phase's best outline; depth
  // restarts at zero so each tree gets the full d_max budget.
  result.second_phase =
      run_phase(result.first_phase.best_outline, second_cfg, proposer, evaluator, counts);
  result.outline = result.second_phase.best_outline;
  return result;
}

nlohmann::json tree_to_json(const SearchNode& node) {
  nlohmann::json children = nlohmann::json::array();
  for (const auto& c : node.children) children.push_back(tree_to_json(*c));
  nlohmann::json cached;
  if (node.cached_extensions.has_value()) {
    cached = nlohmann::json::array();
    for (const auto& e : *node.cached_extensions) cached.push_back(to_json(e));
  } else {
    cached = nullptr;
  }
  return nlohmann::json{
      {"cached_extensions", std::move(cached)},
      {"children", std::move(children)},
      {"creation_index", node.creation_index},
      {"depth", node.depth},
      {"fully_expanded", node.fully_expanded},
      {"next_extension", node.next_extension},
      {"outline", to_json(node.outline)},
      {"plot_reward", node.plot_reward},
      {"terminal", node.terminal},
      {"total_return", node.total_return},
      {"visits", node.visits},
  };
}

nlohmann::json search_result_to_json(const SearchResult& result, const SearchConfig& config) {
  return nlohmann::json{
      {"best_outline", to_json(result.best_outline)},
      {"best_reward", result.best_reward},
      {"complete", result.complete},
      {"config",
       {
           {"d_max", config.d_max},
           {"direction", std::string(to_string(config.direction))},
           {"early_stopping", config.early_stopping},
           {"exploration_c", config.exploration_c},
           {"iterations", config.iterations},
           {"k_max", config.k_max},
           {"s_max", config.s_max},
           {"seed", config.seed},
       }},
      {"iterations_run", result.iterations_run},
      {"provider_call_counts", result.provider_call_counts},
      {"root", result.tree_root ? tree_to_json(*result.tree_root) : nlohmann::json(nullptr)},
  };
}

}  // namespace bitmcts
