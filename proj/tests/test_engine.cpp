#include "bitmcts/engine.hpp"

#include <cmath>

#include "bitmcts/errors.hpp"
#include "bitmcts/logging.hpp"
#include "bitmcts/rng.hpp"
#include "bitmcts/synthetic.hpp"
#include "doctest.h"
#include "support/engine_oracle.hpp"
#include "support/test_util.hpp"

using namespace bitmcts;
using namespace bitmcts::test;

namespace {

SearchConfig small_config(Direction dir, int iterations = 30, int d_max = 2, int k_max = 2) {
  SearchConfig cfg;
  cfg.direction = dir;
  cfg.iterations = iterations;
  cfg.d_max = d_max;
  cfg.k_max = k_max;
  return cfg;
}

SearchNode* add_child(SearchNode& parent, const std::string& id, const std::string& text,
                      int visits, double total_return, std::uint64_t creation_index) {
  auto child = std::make_unique<SearchNode>(
      parent.outline.appended(PlotEvent{id, text, EventOrigin::ForwardSearch}));
  child->parent = &parent;
  child->depth = parent.depth + 1;
  child->visits = visits;
  child->total_return = total_return;
  child->creation_index = creation_index;
  parent.children.push_back(std::move(child));
  parent.fully_expanded = true;
  return parent.children.back().get();
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("ucb score worked examples") {
  SearchNode child(climax_outline());

  // W=0, N=1, parent N=1: ln 1 = 0, so pure mean.
  child.visits = 1;
  child.total_return = 0.0;
  CHECK(ucb_score(child, 1, 0.5) == doctest::Approx(0.0).epsilon(1e-12));

  // W=3, N=2, parent N=10, c=0.5.
  child.visits = 2;
  child.total_return = 3.0;
  const double expected = 1.5 + 0.5 * std::sqrt(2.0 * std::log(10.0) / 2.0);
  CHECK(ucb_score(child, 10, 0.5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ucb_score(child, 10, 0.5) == doctest::Approx(2.258713).epsilon(1e-6));
}

TEST_CASE("ucb rejects unvisited nodes") {
  SearchNode child(climax_outline());
  child.visits = 0;
  CHECK_THROWS_AS(ucb_score(child, 3, 0.5), InvariantError);
  child.visits = 1;
  CHECK_THROWS_AS(ucb_score(child, 0, 0.5), InvariantError);
}

TEST_CASE("c=0 reduces selection to pure exploitation") {
  // With no exploration term, argmax UCB == argmax W/N on randomized stats.
  SplitMix64 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    SearchNode parent(climax_outline());
    parent.visits = 1;
    std::size_t arm_count = 2 + rng.below(4);
    double best_mean = -1.0;
    std::size_t best_arm = 0;
    for (std::size_t i = 0; i < arm_count; ++i) {
      const int visits = 1 + static_cast<int>(rng.below(9));
      const double total = static_cast<double>(rng.below(100)) / 10.0;
      auto* child = add_child(parent, "c" + std::to_string(i), "arm " + std::to_string(i),
                              visits, total, i + 1);
      parent.visits += visits;
      const double mean = child->total_return / child->visits;
      if (mean > best_mean) {
        best_mean = mean;
        best_arm = i;
      }
    }
    std::size_t argmax = 0;
    double best_ucb = -1.0;
    for (std::size_t i = 0; i < arm_count; ++i) {
      const double u = ucb_score(*parent.children[i], parent.visits, 0.0);
      if (u > best_ucb) {
        best_ucb = u;
        argmax = i;
      }
    }
    CHECK(argmax == best_arm);
  }
}

TEST_CASE("select_leaf stops at the root when it is not fully expanded") {
  ScriptedProposer proposer;
  ScriptedEvaluator evaluator;
  SearchTree tree(climax_outline(), small_config(Direction::Forward), proposer, evaluator);
  CHECK(tree.select_leaf() == &tree.root());
}

TEST_CASE("select_leaf breaks UCB ties toward the earliest child") {
  ScriptedProposer proposer;
  ScriptedEvaluator evaluator;
  SearchTree tree(climax_outline(), small_config(Direction::Forward), proposer, evaluator);
  SearchNode& root = tree.root();
  root.visits = 4;
  // Children 0 and 1 tie at UCB, child 2 trails; childless children stop the
  // descent immediately.
  add_child(root, "a", "alpha", 1, 2.1, 1);
  add_child(root, "b", "beta", 1, 2.1, 2);
  add_child(root, "c", "gamma", 1, 1.0, 3);
  for (auto& c : root.children) c->fully_expanded = false;

  SearchNode* leaf = tree.select_leaf();
  CHECK(leaf == root.children[0].get());
}

TEST_CASE("select_leaf follows a hand-computed three-level descent") {
  // Hand-verified UCB arithmetic, c = 0.5.
  // Level 1: parent N=10. a: W/N=4/2=2.0, b: W/N=5/3 ~ 1.667.
  //   ucb(a) = 2.0 + 0.5*sqrt(2 ln 10 / 2) ~ 2.7587
  //   ucb(b) = 1.667 + 0.5*sqrt(2 ln 10 / 3) ~ 2.2862   -> descend a
  // Level 2: parent N=2. a1: 1/1 + 0.5*sqrt(2 ln 2 / 1) ~ 1.5887
  //          a2: 1.8/1 + 0.5*sqrt(2 ln 2 / 1) ~ 2.3887  -> descend a2
  ScriptedProposer proposer;
  ScriptedEvaluator evaluator;
  SearchTree tree(climax_outline(), small_config(Direction::Forward), proposer, evaluator);
  SearchNode& root = tree.root();
  root.visits = 10;
  SearchNode* a = add_child(root, "a", "branch a", 2, 4.0, 1);
  add_child(root, "b", "branch b", 3, 5.0, 2);
  SearchNode* a1 = add_child(*a, "a1", "leaf a1", 1, 1.0, 3);
  SearchNode* a2 = add_child(*a, "a2", "leaf a2", 1, 1.8, 4);
  a1->fully_expanded = false;
  a2->fully_expanded = false;

  const double ucb_a = ucb_score(*a, 10, 0.5);
  const double ucb_b = ucb_score(*root.children[1], 10, 0.5);
  CHECK(ucb_a == doctest::Approx(2.0 + 0.5 * std::sqrt(2.0 * std::log(10.0) / 2.0)));
  CHECK(ucb_b == doctest::Approx(5.0 / 3.0 + 0.5 * std::sqrt(2.0 * std::log(10.0) / 3.0)));
  CHECK(ucb_a > ucb_b);

  SearchNode* leaf = tree.select_leaf();
  CHECK(leaf == a2);
}

TEST_CASE("expand calls the proposer once and instantiates one child per call") {
  const Outline root_outline = climax_outline();
  ScriptedProposer scripted;
  scripted.script(root_outline, {"aa", "bb", "cc"});
  CountingProposer proposer(scripted);
  ScriptedEvaluator evaluator;
  SearchConfig cfg = small_config(Direction::Forward, 30, 4, 3);
  SearchTree tree(root_outline, cfg, proposer, evaluator);
  SearchNode& root = tree.root();

  SearchNode* first = tree.expand(root);
  REQUIRE(first != nullptr);
  CHECK(first->outline.events().back().text == "aa");
  CHECK(first->visits == 0);
  CHECK(first->total_return == 0.0);
  CHECK(first->depth == 1);
  CHECK(root.next_extension == 1);
  CHECK_FALSE(root.fully_expanded);

  SearchNode* second = tree.expand(root);
  REQUIRE(second != nullptr);
  CHECK(second->outline.events().back().text == "bb");

  SearchNode* third = tree.expand(root);
  REQUIRE(third != nullptr);
  CHECK(third->outline.events().back().text == "cc");
  CHECK(root.fully_expanded);

  // Three expansions, exactly one proposer call for this node.
  CHECK(proposer.total_proposes() == 1);
  CHECK(proposer.max_proposes_per_outline() == 1);
  CHECK_THROWS_AS(tree.expand(root), InvariantError);
}

TEST_CASE("backward expansion prepends and shifts the climax index") {
  Outline root_outline = climax_outline().appended(ev("f1", "aftermath"));
  ScriptedProposer proposer;
  proposer.script(root_outline, {"antecedent r1"});
  ScriptedEvaluator evaluator;
  SearchTree tree(root_outline, small_config(Direction::Backward), proposer, evaluator);

  SearchNode* child = tree.expand(tree.root());
  REQUIRE(child != nullptr);
  CHECK(child->outline.events().front().text == "antecedent r1");
  CHECK(child->outline.climax_index() == 1);
  CHECK(tree.root().outline.climax_index() == 0);
}

TEST_CASE("expand skips candidates duplicating outline or sibling texts") {
  const Outline root_outline = climax_outline("The Storm");
  ScriptedProposer scripted;
  // "the storm" duplicates the climax after normalization; second "fresh"
  // duplicates the first sibling.
  scripted.script(root_outline, {"  THE STORM ", "fresh plot", "Fresh Plot", "last plot"});
  ScriptedEvaluator evaluator;
  SearchTree tree(root_outline, small_config(Direction::Forward, 30, 4, 4), scripted,
                  evaluator);
  SearchNode& root = tree.root();

  SearchNode* first = tree.expand(root);
  REQUIRE(first != nullptr);
  CHECK(first->outline.events().back().text == "fresh plot");

  SearchNode* second = tree.expand(root);
  REQUIRE(second != nullptr);
  CHECK(second->outline.events().back().text == "last plot");
  CHECK(root.fully_expanded);
  CHECK(root.children.size() == 2);
}

TEST_CASE("expand with zero admissible candidates marks the leaf fully expanded") {
  const Outline root_outline = climax_outline("only event");
  ScriptedProposer scripted;
  scripted.script(root_outline, {"only event"});  // inadmissible duplicate
  ScriptedEvaluator evaluator;
  SearchTree tree(root_outline, small_config(Direction::Forward), scripted, evaluator);

  SearchNode* child = tree.expand(tree.root());
  CHECK(child == nullptr);
  CHECK(tree.root().fully_expanded);
  CHECK(tree.root().children.empty());
}

TEST_CASE("simulate returns rho and sets terminal at maximum depth") {
  SyntheticProvider provider(SyntheticOptions{});
  SearchConfig cfg = small_config(Direction::Forward, 10, 3, 2);
  SearchTree tree(climax_outline(), cfg, provider, provider);
  SearchNode& root = tree.root();
  root.depth = cfg.d_max;  // simulate a node sitting at the depth ceiling
  const double reward = tree.simulate(root);
  CHECK(reward == doctest::Approx(root.plot_reward));
  CHECK(root.terminal);
}

TEST_CASE("simulate with a monotone evaluator takes exactly min(s_max, d_max - d) steps") {
  SyntheticOptions options;
  options.evaluator = SyntheticEvaluatorMode::LengthMonotone;
  SyntheticProvider provider(options);

  for (int depth = 0; depth < 4; ++depth) {
    SearchConfig cfg = small_config(Direction::Forward, 10, 4, 2);
    cfg.s_max = 3;
    SearchTree tree(climax_outline(), cfg, provider, provider);
    SearchNode& node = tree.root();
    node.depth = depth;
    const double rho = node.plot_reward;
    const int expected_steps = std::min(cfg.s_max, cfg.d_max - depth);
    const double reward = tree.simulate(node);
    // Length-monotone reward: +1 per accepted extension.
    CHECK(reward == doctest::Approx(rho + expected_steps));
    CHECK_FALSE(node.terminal);
  }
}

TEST_CASE("simulate with a strictly decreasing evaluator accepts nothing") {
  SyntheticOptions options;
  options.evaluator = SyntheticEvaluatorMode::LengthDecreasing;
  SyntheticProvider provider(options);
  SearchConfig cfg = small_config(Direction::Forward, 10, 5, 2);
  SearchTree tree(climax_outline(), cfg, provider, provider);
  SearchNode& root = tree.root();

  const double reward = tree.simulate(root);
  CHECK(reward == doctest::Approx(root.plot_reward));
  CHECK_FALSE(root.terminal);  // a rejected sample must not set tau
}

TEST_CASE("fixed-depth simulation accepts every sample when early stopping is off") {
  SyntheticOptions options;
  options.evaluator = SyntheticEvaluatorMode::LengthDecreasing;
  SyntheticProvider provider(options);
  SearchConfig cfg = small_config(Direction::Forward, 10, 5, 2);
  cfg.early_stopping = false;
  cfg.s_max = 3;
  SearchTree tree(climax_outline(), cfg, provider, provider);
  SearchNode& root = tree.root();

  // Three accepted steps drop the length-decreasing reward by three.
  const double reward = tree.simulate(root);
  CHECK(reward == doctest::Approx(root.plot_reward - 3.0));
}

TEST_CASE("backpropagate adds one visit and the full reward along the path") {
  ScriptedProposer proposer;
  ScriptedEvaluator evaluator;
  SearchTree tree(climax_outline(), small_config(Direction::Forward), proposer, evaluator);
  SearchNode& root = tree.root();
  SearchNode* mid = add_child(root, "m", "mid", 0, 0.0, 1);
  SearchNode* leaf = add_child(*mid, "l", "leaf", 0, 0.0, 2);

  SearchTree::backpropagate(tree.path_from_root(*leaf), 7.0);
  for (const SearchNode* node :
       std::initializer_list<const SearchNode*>{&root, mid, leaf}) {
    CHECK(node->visits == 1);
    CHECK(node->total_return == doctest::Approx(7.0));
  }
}

TEST_CASE("run_phase anatomy with a single iteration") {
  SyntheticProvider provider(SyntheticOptions{});
  SearchConfig cfg = small_config(Direction::Forward, 1, 3, 2);
  SearchResult result = run_phase(climax_outline(), cfg, provider, provider);

  CHECK(result.iterations_run == 1);
  REQUIRE(result.tree_root != nullptr);
  CHECK(result.tree_root->visits == 1);
  CHECK(result.tree_root->children.size() == 1);
  CHECK(result.tree_root->children[0]->visits == 1);
}

TEST_CASE("after i iterations the root has been visited i times") {
  SyntheticProvider provider(SyntheticOptions{.seed = 3});
  for (int iterations : {1, 5, 17, 50}) {
    SearchConfig cfg = small_config(Direction::Forward, iterations, 3, 3);
    SearchResult result = run_phase(climax_outline(), cfg, provider, provider);
    CHECK(result.tree_root->visits == iterations);
    CHECK(result.iterations_run == iterations);
  }
}

TEST_CASE("run_phase twice with one seed serializes identically") {
  SyntheticOptions options{.seed = 12345};
  SearchConfig cfg = small_config(Direction::Forward, 25, 3, 3);
  SyntheticProvider p1(options), p2(options);
  SearchResult a = run_phase(climax_outline(), cfg, p1, p1);
  SearchResult b = run_phase(climax_outline(), cfg, p2, p2);
  CHECK(search_result_to_json(a, cfg).dump() == search_result_to_json(b, cfg).dump());
}

TEST_CASE("run_phase matches the exhaustive enumeration oracle") {
  // Deterministic providers, K=2, d_max=2, 30 iterations: the candidate tree
  // holds at most 7 outlines. The exploration constant is raised so the
  // budget certifiably covers the whole space; the reward gap between
  // subtrees can reach 9, which c=0.5 cannot bridge in 30 iterations.
  for (std::uint64_t seed : {1ull, 2ull, 7ull, 42ull}) {
    SyntheticOptions options{.seed = seed};
    SyntheticProvider engine_provider(options);
    SearchConfig cfg = small_config(Direction::Forward, 30, 2, 2);
    cfg.exploration_c = 4.0;
    SearchResult result = run_phase(climax_outline(), cfg, engine_provider, engine_provider);

    SyntheticProvider oracle_provider(options);
    const EnumerationResult oracle = exhaustive_search(
        climax_outline(), Direction::Forward, cfg.d_max, cfg.k_max, oracle_provider,
        oracle_provider);
    CHECK(result.best_reward == doctest::Approx(oracle.best_score).epsilon(1e-12));
  }
}

TEST_CASE("best outline reward equals the evaluator score cached at its node") {
  SyntheticProvider provider(SyntheticOptions{.seed = 5});
  SearchConfig cfg = small_config(Direction::Forward, 20, 3, 2);
  SearchResult result = run_phase(climax_outline(), cfg, provider, provider);
  SyntheticProvider checker(SyntheticOptions{.seed = 5});
  CHECK(result.best_reward ==
        doctest::Approx(clamp_reward(checker.score(result.best_outline).total)));
}

TEST_CASE("bidirectional composition keeps forward events after the climax") {
  SyntheticProvider provider(SyntheticOptions{.seed = 9});
  SearchConfig fwd = small_config(Direction::Forward, 12, 2, 2);
  SearchConfig bwd = small_config(Direction::Backward, 12, 2, 2);
  const PlotEvent climax{"e-star", "the reveal", EventOrigin::Climax};

  BidirectionalResult result = bidirectional_search(climax, fwd, bwd, provider, provider);
  const Outline& outline = result.outline;

  // The climax index equals the number of backward-phase events; everything
  // before it came from the backward phase, everything after from forward.
  const std::size_t climax_index = outline.climax_index();
  CHECK(outline.events()[climax_index].text == "the reveal");
  for (std::size_t i = 0; i < outline.size(); ++i) {
    if (i < climax_index) {
      CHECK(outline.events()[i].origin == EventOrigin::BackwardSearch);
    } else if (i > climax_index) {
      CHECK(outline.events()[i].origin == EventOrigin::ForwardSearch);
    }
  }

  // Phase 1 only appends: its best outline must keep the climax first.
  CHECK(result.first_phase.best_outline.climax_index() == 0);
}

TEST_CASE("order-swapped composition mirrors the schedule") {
  SyntheticProvider provider(SyntheticOptions{.seed = 9});
  SearchConfig fwd = small_config(Direction::Forward, 12, 2, 2);
  SearchConfig bwd = small_config(Direction::Backward, 12, 2, 2);
  const PlotEvent climax{"e-star", "the reveal", EventOrigin::Climax};

  BidirectionalResult result =
      bidirectional_search(climax, fwd, bwd, provider, provider, /*swap_order=*/true);
  // Backward ran first: its result keeps the climax last.
  const Outline& first = result.first_phase.best_outline;
  CHECK(first.climax_index() == first.size() - 1);
  // Forward ran second over that root; composition law unchanged.
  const Outline& outline = result.outline;
  for (std::size_t i = 0; i < outline.size(); ++i) {
    if (i < outline.climax_index()) {
      CHECK(outline.events()[i].origin == EventOrigin::BackwardSearch);
    } else if (i > outline.climax_index()) {
      CHECK(outline.events()[i].origin == EventOrigin::ForwardSearch);
    }
  }
}

TEST_CASE("zero-growth degenerate returns the climax alone") {
  // A proposer with no admissible candidates anywhere: the tree never grows
  // and both phases return the root outline.
  ScriptedProposer proposer;  // unscripted: proposes nothing
  ScriptedEvaluator evaluator(4.0);
  const PlotEvent climax{"e-star", "lonely peak", EventOrigin::Climax};
  SearchConfig cfg = small_config(Direction::Forward, 5, 3, 2);
  BidirectionalResult result = bidirectional_search(climax, cfg, cfg, proposer, evaluator);
  CHECK(result.outline.size() == 1);
  CHECK(result.outline.events()[0].text == "lonely peak");
}

TEST_CASE("tree invariants hold under randomized synthetic runs") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    SyntheticOptions options{.seed = seed};
    SyntheticProvider inner(options);
    CountingProposer proposer(inner);
    SearchConfig cfg;
    cfg.direction = seed % 2 == 0 ? Direction::Forward : Direction::Backward;
    cfg.iterations = 20 + static_cast<int>(seed);
    cfg.d_max = 2 + static_cast<int>(seed % 3);
    cfg.k_max = 2 + static_cast<int>(seed % 2);
    SearchResult result = run_phase(climax_outline(), cfg, proposer, inner);

    CHECK(result.tree_root->visits == cfg.iterations);
    CHECK(proposer.max_proposes_per_outline() == 1);

    for_each_node(*result.tree_root, [&](const SearchNode& node) {
      int child_visits = 0;
      for (const auto& child : node.children) {
        child_visits += child->visits;
        CHECK(child->depth == node.depth + 1);
        CHECK(child->parent == &node);
      }
      CHECK(node.visits >= child_visits);
      if (node.visits > 0) {
        const double mean = node.total_return / node.visits;
        CHECK(mean >= 0.0);
        CHECK(mean <= 10.0);
      }
      CHECK(node.outline.size() == result.tree_root->outline.size() +
                                       static_cast<std::size_t>(node.depth));
      if (node.terminal) CHECK(node.depth >= cfg.d_max);
    });
  }
}

TEST_CASE("a provider failure mid-rollout returns the best accepted reward") {
  // Evaluator that works for the first rollout step, then dies.
  class DyingEvaluator final : public Evaluator {
   public:
    explicit DyingEvaluator(Evaluator& inner) : inner_(inner) {}
    ScoreBreakdown score(const Outline& outline) override {
      if (calls_++ >= 2) throw TransportError("evaluator offline");  // root + 1 step
      return inner_.score(outline);
    }
    Evaluator& inner_;
    int calls_ = 0;
  };

  SyntheticOptions options;
  options.evaluator = SyntheticEvaluatorMode::LengthMonotone;
  SyntheticProvider provider(options);
  DyingEvaluator evaluator(provider);
  SearchConfig cfg = small_config(Direction::Forward, 5, 5, 2);
  cfg.s_max = 3;
  SearchTree tree(climax_outline(), cfg, provider, evaluator);

  const std::size_t warnings_before = warning_count();
  const double rho = tree.root().plot_reward;
  const double reward = tree.simulate(tree.root());
  // One accepted extension before the failure: reward = rho + 1, tau clear.
  CHECK(reward == doctest::Approx(rho + 1.0));
  CHECK_FALSE(tree.root().terminal);
  CHECK(warning_count() > warnings_before);
}

TEST_CASE("provider exhaustion aborts with a partial result flagged incomplete") {
  // Proposer that dies after its budget is spent.
  class ExhaustibleProposer final : public Proposer {
   public:
    ExhaustibleProposer(Proposer& inner, int budget) : inner_(inner), budget_(budget) {}
    std::vector<PlotEvent> propose(const ProposeRequest& req) override {
      if (budget_-- <= 0) throw TransportError("provider budget exhausted");
      return inner_.propose(req);
    }
    PlotEvent sample_extension(const Outline& outline, Direction dir,
                               std::uint64_t salt) override {
      return inner_.sample_extension(outline, dir, salt);
    }
    Proposer& inner_;
    int budget_;
  };

  SyntheticProvider inner(SyntheticOptions{.seed = 8});
  ExhaustibleProposer proposer(inner, 2);
  SearchConfig cfg = small_config(Direction::Forward, 40, 3, 2);
  SearchResult result = run_phase(climax_outline(), cfg, proposer, inner);
  CHECK_FALSE(result.complete);
  CHECK(result.iterations_run < cfg.iterations);
  CHECK(result.tree_root->visits == result.iterations_run);
  // The partial result still extracts a best outline.
  CHECK(result.best_outline.size() >= 1);
}

TEST_CASE("phase children share the root outline as prefix or suffix") {
  for (auto dir : {Direction::Forward, Direction::Backward}) {
    SyntheticProvider provider(SyntheticOptions{.seed = 15});
    const Outline root = climax_outline("anchor").appended(ev("f0", "given event"));
    SearchConfig cfg = small_config(dir, 15, 2, 2);
    SearchResult result = run_phase(root, cfg, provider, provider);
    for_each_node(*result.tree_root, [&](const SearchNode& node) {
      const auto& events = node.outline.events();
      const auto& root_events = root.events();
      for (std::size_t i = 0; i < root_events.size(); ++i) {
        const std::size_t j =
            dir == Direction::Forward ? i : events.size() - root_events.size() + i;
        CHECK(events[j].id == root_events[i].id);
      }
    });
  }
}

TEST_CASE("search config defaults follow the reference hyperparameters") {
  const SearchConfig cfg;
  CHECK(cfg.exploration_c == doctest::Approx(0.5));
  CHECK(cfg.iterations == 50);
  CHECK(cfg.d_max == 8);
  CHECK(cfg.s_max == 3);
  CHECK(cfg.k_max == 4);
  CHECK(cfg.early_stopping);
}

}  // TEST_SUITE
