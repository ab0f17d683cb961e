#pragma once

#include "bitmcts/engine.hpp"
#include "bitmcts/pipeline.hpp"
#include "bitmcts/strategy.hpp"

namespace bitmcts {

// Search-strategy baselines and ablations. All of them consume the same
// proposer/evaluator interfaces as the engine and feed the same pipeline, so
// the evaluation harness can compare them like for like.

// Classic beam search over one direction: every beam outline is extended
// with up to k_max proposals per level, all extensions scored, top `width`
// kept (ties by insertion order). Returns the best-scoring outline seen
// anywhere, the root included.
Outline beam_search_phase(const Outline& root, Direction dir, int width, int depth, int k_max,
                          Proposer& proposer, Evaluator& evaluator);

// Forward phase from [climax], then backward phase re-rooted on its result.
Outline beam_search_bidirectional(const PlotEvent& climax, int width, int depth, int k_max,
                                  Proposer& proposer, Evaluator& evaluator);

// N independent greedy rollouts (forward then backward, one sampled
// candidate per step, every sample kept); returns the highest-scoring
// complete outline. Rollout i samples with salt i, so a stochastic proposer
// diversifies rollouts while a deterministic one repeats them.
Outline best_of_n(const PlotEvent& climax, int n, int depth, Proposer& proposer,
                  Evaluator& evaluator);

// Single-call outline generation: the provider returns surrounding events
// plus the position where the given climax slots in.
Outline direct_outline_search(const std::string& conflict, const PlotEvent& climax,
                              StoryProvider& provider, EventIdGenerator& ids);

// Runs the full pipeline under the given strategy variant. Downstream
// stages are identical across variants; the artifact metadata records which
// variant produced it.
FictionArtifact run_variant(const StrategySpec& spec, const Theme& theme,
                            const PipelineOptions& options, StoryProvider& provider);

}  // namespace bitmcts
