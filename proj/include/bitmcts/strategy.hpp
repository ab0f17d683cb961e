#pragma once

#include <string>
#include <string_view>

namespace bitmcts {

// Search-strategy variants sharing one provider surface and one artifact
// schema, so their outputs can be judged like for like.
enum class StrategyKind {
  BitMcts,               // bidirectional MCTS, the complete method
  Beam,                  // beam search, forward then backward
  BestOfN,               // N independent greedy rollouts, keep the best
  Direct,                // single-call outline, no search
  UnidirectionalForward, // forward phase only
  OrderSwapped,          // backward phase before forward
  NoEarlyStop,           // fixed-depth rollouts accepting every sample
};

struct StrategySpec {
  StrategyKind kind = StrategyKind::BitMcts;
  int beam_width = 4;  // beam only
  int best_of_n = 8;   // best-of-n only
  // Depth budget per phase for beam/best-of-n; defaults to the MCTS d_max
  // ceiling so comparisons stay fair.
  int depth = 8;

  // Throws ConfigError when params are inconsistent with the kind.
  void validate() const;
};

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(std::string_view s);

}  // namespace bitmcts
