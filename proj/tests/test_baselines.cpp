#include "bitmcts/baselines.hpp"

#include <set>

#include "bitmcts/errors.hpp"
#include "bitmcts/synthetic.hpp"
#include "doctest.h"
#include "support/engine_oracle.hpp"
#include "support/test_util.hpp"

using namespace bitmcts;
using namespace bitmcts::test;

namespace {
const PlotEvent kClimax{"e-star", "the confession", EventOrigin::Climax};
}

TEST_SUITE("baselines") {

TEST_CASE("strategy kinds round-trip through their names") {
  for (auto kind : {StrategyKind::BitMcts, StrategyKind::Beam, StrategyKind::BestOfN,
                    StrategyKind::Direct, StrategyKind::UnidirectionalForward,
                    StrategyKind::OrderSwapped, StrategyKind::NoEarlyStop}) {
    CHECK(strategy_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(strategy_kind_from_string("dfs"), ConfigError);
  StrategySpec bad;
  bad.kind = StrategyKind::Beam;
  bad.beam_width = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("beam keeps at most width outlines per level") {
  SyntheticProvider provider(SyntheticOptions{.seed = 3});
  // Width 1 is greedy hill-climbing; it must return a valid outline whose
  // score the evaluator reproduces.
  const Outline greedy = beam_search_phase(Outline::root(kClimax), Direction::Forward, 1, 3, 4,
                                           provider, provider);
  CHECK(greedy.size() >= 1);
  CHECK(greedy.climax_index() == 0);
}

TEST_CASE("beam with width >= branching^depth equals the exhaustive maximum") {
  for (std::uint64_t seed : {1ull, 5ull, 9ull}) {
    SyntheticOptions options{.seed = seed};
    SyntheticProvider engine_provider(options);
    const int depth = 2, k = 2;
    // 2^2 = 4 leaves; width 8 covers every outline at each level.
    const Outline beamed = beam_search_phase(Outline::root(kClimax), Direction::Forward, 8,
                                             depth, k, engine_provider, engine_provider);

    SyntheticProvider oracle_provider(options);
    const EnumerationResult oracle = exhaustive_search(
        Outline::root(kClimax), Direction::Forward, depth, k, oracle_provider, oracle_provider);
    SyntheticProvider scorer(options);
    CHECK(clamp_reward(scorer.score(beamed).total) ==
          doctest::Approx(oracle.best_score).epsilon(1e-12));
  }
}

TEST_CASE("beam bidirectional composes forward and backward phases") {
  SyntheticProvider provider(SyntheticOptions{.seed = 7});
  const Outline outline = beam_search_bidirectional(kClimax, 2, 2, 2, provider, provider);
  CHECK(outline.climax().text == kClimax.text);
  for (std::size_t i = 0; i < outline.size(); ++i) {
    if (i < outline.climax_index()) {
      CHECK(outline.events()[i].origin == EventOrigin::BackwardSearch);
    } else if (i > outline.climax_index()) {
      CHECK(outline.events()[i].origin == EventOrigin::ForwardSearch);
    }
  }
}

TEST_CASE("best_of_n with deterministic sampling returns the same outline for any n") {
  SyntheticOptions options{.seed = 13};  // stochastic_sampling off
  SyntheticProvider p1(options);
  const Outline one = best_of_n(kClimax, 1, 2, p1, p1);
  SyntheticProvider p2(options);
  const Outline many = best_of_n(kClimax, 6, 2, p2, p2);
  CHECK(to_json(one).dump() == to_json(many).dump());
}

TEST_CASE("best_of_n n=1 equals a single greedy rollout") {
  SyntheticOptions options{.seed = 13};
  SyntheticProvider provider(options);
  const Outline outline = best_of_n(kClimax, 1, 2, provider, provider);
  // Forward then backward, depth 2 each: up to 5 events in total.
  CHECK(outline.size() <= 5);
  CHECK(outline.size() >= 1);
  CHECK(outline.climax().text == kClimax.text);
}

TEST_CASE("stochastic best_of_n approaches the enumerated maximum with high frequency") {
  // The sampler draws from the propose() candidate pool, so the space of
  // depth-1 rollouts is exactly enumerable: every (forward, backward)
  // candidate pair. 50 stochastic rollouts should hit the maximum in nearly
  // every seed.
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SyntheticOptions stochastic{.seed = seed};
    stochastic.stochastic_sampling = true;
    SyntheticProvider provider(stochastic);
    const Outline found = best_of_n(kClimax, 50, 1, provider, provider);

    // Enumeration oracle over the same pool, via the propose() surface.
    SyntheticProvider oracle(SyntheticOptions{.seed = seed});
    const Outline root = Outline::root(kClimax);
    double best = clamp_reward(oracle.score(root).total);
    for (const auto& fwd : oracle.propose(ProposeRequest{root, Direction::Forward, 4, 0})) {
      if (root.contains_normalized_text(fwd.text)) continue;
      const Outline mid = root.appended(fwd);
      for (const auto& bwd : oracle.propose(ProposeRequest{mid, Direction::Backward, 4, 0})) {
        if (mid.contains_normalized_text(bwd.text)) continue;
        best = std::max(best, clamp_reward(oracle.score(mid.prepended(bwd)).total));
      }
    }
    SyntheticProvider scorer(SyntheticOptions{.seed = seed});
    if (clamp_reward(scorer.score(found).total) >= best - 1e-9) ++hits;
  }
  CHECK(hits >= 16);
}

TEST_CASE("direct outline injects the climax at the indicated position") {
  SyntheticProvider provider(SyntheticOptions{.seed = 5});
  provider.set_context(make_theme("t", "memory"), "the conflict");
  EventIdGenerator ids(6);
  const Outline outline = direct_outline_search("the conflict", kClimax, provider, ids);

  CHECK(provider.counts().get("direct") == 1);  // single-call contract
  CHECK(outline.size() >= 3);
  CHECK(outline.climax().text == kClimax.text);
  CHECK(outline.events()[outline.climax_index()].id == kClimax.id);
}

TEST_CASE("no-early-stop takes every step where guided simulation takes none") {
  SyntheticOptions options{.seed = 1};
  options.evaluator = SyntheticEvaluatorMode::LengthDecreasing;
  SyntheticProvider provider(options);

  SearchConfig guided;
  guided.iterations = 1;
  guided.d_max = 5;
  guided.s_max = 3;
  guided.k_max = 2;
  SearchConfig fixed = guided;
  fixed.early_stopping = false;

  SearchTree guided_tree(climax_outline(), guided, provider, provider);
  const double guided_reward = guided_tree.simulate(guided_tree.root());
  CHECK(guided_reward == doctest::Approx(guided_tree.root().plot_reward));

  SearchTree fixed_tree(climax_outline(), fixed, provider, provider);
  const double fixed_reward = fixed_tree.simulate(fixed_tree.root());
  CHECK(fixed_reward == doctest::Approx(fixed_tree.root().plot_reward - 3.0));
}

TEST_CASE("unidirectional variant leaves the climax at index zero") {
  SyntheticProvider provider(SyntheticOptions{.seed = 19});
  PipelineOptions options;
  options.forward.iterations = 6;
  options.forward.d_max = 2;
  options.forward.k_max = 2;
  options.backward = options.forward;
  StrategySpec spec;
  spec.kind = StrategyKind::UnidirectionalForward;
  const FictionArtifact artifact =
      run_variant(spec, make_theme("t", "memory"), options, provider);
  CHECK(artifact.rough_outline.climax_index() == 0);
}

TEST_CASE("all seven variants run end to end on synthetic providers") {
  for (auto kind : {StrategyKind::BitMcts, StrategyKind::Beam, StrategyKind::BestOfN,
                    StrategyKind::Direct, StrategyKind::UnidirectionalForward,
                    StrategyKind::OrderSwapped, StrategyKind::NoEarlyStop}) {
    SyntheticProvider provider(SyntheticOptions{.seed = 29});
    PipelineOptions options;
    options.forward.iterations = 5;
    options.forward.d_max = 2;
    options.forward.k_max = 2;
    options.backward = options.forward;
    options.strategy.kind = kind;
    options.strategy.beam_width = 2;
    options.strategy.best_of_n = 3;
    options.strategy.depth = 2;
    const FictionArtifact artifact =
        run_variant(options.strategy, make_theme("t", "memory"), options, provider);
    CHECK_FALSE(artifact.full_text.empty());
    CHECK(artifact.metadata.at("strategy").at("kind") == std::string(to_string(kind)));
    CHECK(artifact.refined_outline.outline.contains_id(artifact.climax.event.id));
  }
}

}  // TEST_SUITE
