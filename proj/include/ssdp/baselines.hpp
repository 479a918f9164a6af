#pragma once

#include "ssdp/engine.hpp"

namespace ssdp {

enum class StrategyId { SSDP, ParallelNoMerge, MCTS, BestOfN, Beam };

const char* to_string(StrategyId s);
StrategyId strategy_from_string(const std::string& s);

// SSDP loop with merging disabled; otherwise identical to run_search.
RunResult run_parallel_no_merge(const std::string& root_text,
                                const Config& config,
                                const BackendSet& backends,
                                RunLabels labels = {});

// Classic sequential MCTS: one UCB-selected leaf per iteration, b children,
// the best child's phi backpropagated from that child. No merging, no gating.
RunResult run_mcts(const std::string& root_text, const Config& config,
                   const BackendSet& backends, RunLabels labels = {});

// n independent greedy rollouts from the root (n = config.r_max): each step
// samples b candidates, scores all of them, and keeps only the argmax-phi
// candidate as a tree node. A rollout that reaches config.max_depth without
// a terminal is discarded (leaf pruned with reason "depth_limit"). The
// answer is the best-phi terminal across rollouts.
RunResult run_best_of_n(const std::string& root_text, const Config& config,
                        const BackendSet& backends, RunLabels labels = {});

// Depth-synchronous beam search of width config.k: every non-terminal beam
// member expands b children, all children are scored, and the best `width`
// children by phi form the next beam. Stops when the beam is all-terminal
// (or empty), at config.max_depth, or on budget.
RunResult run_beam(const std::string& root_text, const Config& config,
                   const BackendSet& backends, RunLabels labels = {});

// Dispatch by strategy id; fills labels.strategy.
RunResult run_strategy(StrategyId strategy, const std::string& root_text,
                       const Config& config, const BackendSet& backends,
                       RunLabels labels = {});

}  // namespace ssdp
