#include "ssdp/baselines.hpp"

#include <algorithm>

#include "ssdp/hash.hpp"
#include "ssdp/policy.hpp"

namespace ssdp {

const char* to_string(StrategyId s) {
  switch (s) {
    case StrategyId::SSDP: return "ssdp";
    case StrategyId::ParallelNoMerge: return "parallel_no_merge";
    case StrategyId::MCTS: return "mcts";
    case StrategyId::BestOfN: return "best_of_n";
    case StrategyId::Beam: return "beam";
  }
  return "?";
}

StrategyId strategy_from_string(const std::string& s) {
  if (s == "ssdp") return StrategyId::SSDP;
  if (s == "parallel_no_merge") return StrategyId::ParallelNoMerge;
  if (s == "mcts") return StrategyId::MCTS;
  if (s == "best_of_n") return StrategyId::BestOfN;
  if (s == "beam") return StrategyId::Beam;
  throw InvalidInputError("unknown strategy: " + s);
}

namespace {

std::vector<std::string> path_texts(const SearchTree& tree, NodeId id) {
  std::vector<std::string> path;
  for (NodeId cur = id;;) {
    const SearchNode& n = tree.nodes[cur];
    path.push_back(n.text);
    if (!n.parent) break;
    cur = *n.parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Shared scaffolding for the sequential baselines: tree + clock + trace with
// a header, plus the common finalization into RunResult.
struct BaselineRun {
  BaselineRun(const std::string& root_text, const Config& config,
              const RunLabels& labels)
      : tree(create_tree(root_text)), clock(config.clock_mode) {
    trace = std::make_shared<TraceLog>(
        labels.run_id, labels.strategy, config.seed,
        to_string(config.clock_mode),
        nlohmann::ordered_json::parse(config_to_json(config)), labels.problem);
    trace->node_created(0, clock.elapsed_s(), 0, std::nullopt, 0, root_text,
                        0.0, false, std::nullopt);
  }

  RunResult finish(int rollouts, const std::string& halt_reason, bool aborted,
                   const std::string& error) {
    RunResult result;
    result.tree = std::move(tree);
    result.trace = trace;
    result.aborted = aborted;
    result.error = error;
    result.halt_reason = halt_reason;
    result.metrics.rollouts_completed = rollouts;
    result.metrics.wall_time_s = clock.elapsed_s();
    result.metrics.solutions = solutions;
    count_tree_metrics(result.tree, result.metrics);
    if (const auto answer = extract_answer(result.tree)) {
      result.metrics.answer = answer->text;
      result.metrics.answer_phi = answer->phi;
    }
    trace->halt(rollouts, clock.elapsed_s(), halt_reason, result.metrics);
    return result;
  }

  // Expands `parent`, applies every candidate as a child node, and returns
  // the new ids. Emits NodeExpanded/NodeCreated/NodeScored/Solution events
  // and advances the clock by the declared costs (including scores of
  // candidates the caller will not keep; `keep_only_best` drops all but the
  // argmax-phi candidate before nodes are created).
  std::vector<NodeId> expand_node(const Config& config,
                                  const BackendSet& backends, NodeId parent,
                                  std::uint64_t seed, int iteration,
                                  bool keep_only_best) {
    const std::vector<std::string> parent_path = path_texts(tree, parent);
    std::vector<Candidate> candidates =
        backends.generator->expand(parent_path, config.b, seed);
    double expand_cost = 0.0;
    for (const Candidate& c : candidates) expand_cost += c.cost_s;
    if (tree.nodes[parent].state == NodeState::Frontier) {
      mark_state(tree, parent, NodeState::Expanded);
    }
    clock.advance(expand_cost);
    trace->node_expanded(iteration, clock.elapsed_s(), parent, expand_cost);

    std::vector<ScoreResult> scores;
    scores.reserve(candidates.size());
    for (const Candidate& c : candidates) {
      std::vector<std::string> child_path = parent_path;
      child_path.push_back(c.text);
      scores.push_back(backends.reward->score(child_path));
      clock.advance(scores.back().cost_s);
    }

    size_t begin = 0, end = candidates.size();
    if (keep_only_best) {
      size_t best = 0;
      for (size_t j = 1; j < candidates.size(); ++j) {
        if (scores[j].phi > scores[best].phi) best = j;
      }
      begin = best;
      end = best + 1;
    }
    std::vector<NodeId> ids;
    for (size_t j = begin; j < end; ++j) {
      const NodeId id = add_child(tree, parent, candidates[j].text,
                                  scores[j].phi, candidates[j].terminal);
      trace->node_created(iteration, clock.elapsed_s(), id, parent,
                          tree.nodes[id].depth, candidates[j].text,
                          scores[j].phi, candidates[j].terminal,
                          candidates[j].group);
      trace->node_scored(iteration, clock.elapsed_s(), id, scores[j].phi,
                         scores[j].cost_s);
      if (candidates[j].terminal) {
        solutions.push_back({id, scores[j].phi});
        trace->solution(iteration, clock.elapsed_s(), id, scores[j].phi);
      }
      ids.push_back(id);
    }
    return ids;
  }

  SearchTree tree;
  RunClock clock;
  std::shared_ptr<TraceLog> trace;
  std::vector<SolutionRecord> solutions;
};

void require_backends(const BackendSet& backends) {
  if (!backends.generator || !backends.reward) {
    throw InvalidInputError("strategy requires generator and reward backends");
  }
}

}  // namespace

RunResult run_parallel_no_merge(const std::string& root_text,
                                const Config& config,
                                const BackendSet& backends, RunLabels labels) {
  Config no_merge = config;
  no_merge.merge_mode = MergeMode::Disabled;
  return run_search(root_text, no_merge, backends, labels);
}

RunResult run_mcts(const std::string& root_text, const Config& config,
                   const BackendSet& backends, RunLabels labels) {
  config.validate();
  require_backends(backends);
  BaselineRun run(root_text, config, labels);
  // k = 1 with p = 0 reduces slot selection to "argmax UCB over the frontier".
  const PolicyParams ucb_only{1, config.w, 0.0};
  int rollouts = 0;
  std::string halt_reason;
  bool aborted = false;
  std::string error;
  try {
    for (;;) {
      if (budget_check(run.clock.elapsed_s(), rollouts, config) ==
          BudgetDecision::Halt) {
        halt_reason = run.clock.elapsed_s() > config.t_max_s ? "time_budget"
                                                             : "rollout_budget";
        break;
      }
      if (run.tree.frontier.empty()) {
        halt_reason = "frontier_exhausted";
        break;
      }
      const int iteration = rollouts + 1;
      const NodeId leaf = select_frontier(run.tree, ucb_only).front();
      const std::vector<NodeId> children =
          run.expand_node(config, backends, leaf,
                          mix64(config.seed, leaf), iteration,
                          /*keep_only_best=*/false);
      NodeId best = children.front();
      for (NodeId id : children) {
        if (run.tree.nodes[id].phi > run.tree.nodes[best].phi) best = id;
      }
      backpropagate(run.tree, best, run.tree.nodes[best].phi);
      run.trace->backprop(iteration, run.clock.elapsed_s(), best,
                          run.tree.nodes[best].phi);
      rollouts += 1;
    }
  } catch (const std::exception& e) {
    aborted = true;
    error = e.what();
    halt_reason = std::string("backend-error: ") + e.what();
  }
  return run.finish(rollouts, halt_reason, aborted, error);
}

RunResult run_best_of_n(const std::string& root_text, const Config& config,
                        const BackendSet& backends, RunLabels labels) {
  config.validate();
  require_backends(backends);
  BaselineRun run(root_text, config, labels);
  const int n = config.r_max;
  int rollouts = 0;
  std::string halt_reason;
  bool aborted = false;
  std::string error;
  try {
    for (; rollouts < n;) {
      if (budget_check(run.clock.elapsed_s(), rollouts, config) ==
          BudgetDecision::Halt) {
        halt_reason = run.clock.elapsed_s() > config.t_max_s ? "time_budget"
                                                             : "rollout_budget";
        break;
      }
      const int iteration = rollouts + 1;
      NodeId cur = 0;
      for (int depth = 0; depth < config.max_depth; ++depth) {
        const std::uint64_t seed =
            mix64(config.seed, mix64(static_cast<std::uint64_t>(iteration),
                                 static_cast<std::uint64_t>(cur)));
        const std::vector<NodeId> kept = run.expand_node(
            config, backends, cur, seed, iteration, /*keep_only_best=*/true);
        cur = kept.front();
        if (run.tree.nodes[cur].state == NodeState::Terminal) break;
      }
      if (run.tree.nodes[cur].state != NodeState::Terminal) {
        // Rollout ran out of depth; discard its dangling leaf.
        mark_state(run.tree, cur, NodeState::PrunedEarlyStop);
        run.trace->node_pruned(iteration, run.clock.elapsed_s(), cur,
                               "depth_limit");
      }
      rollouts += 1;
    }
    if (halt_reason.empty()) halt_reason = "rollout_budget";
  } catch (const std::exception& e) {
    aborted = true;
    error = e.what();
    halt_reason = std::string("backend-error: ") + e.what();
  }
  return run.finish(rollouts, halt_reason, aborted, error);
}

RunResult run_beam(const std::string& root_text, const Config& config,
                   const BackendSet& backends, RunLabels labels) {
  config.validate();
  require_backends(backends);
  BaselineRun run(root_text, config, labels);
  const int width = config.k;
  std::vector<NodeId> beam{0};
  int levels = 0;
  std::string halt_reason;
  bool aborted = false;
  std::string error;
  try {
    for (;;) {
      std::vector<NodeId> to_expand;
      for (NodeId id : beam) {
        if (run.tree.nodes[id].state == NodeState::Frontier) {
          to_expand.push_back(id);
        }
      }
      if (to_expand.empty()) {
        halt_reason = "beam_complete";
        break;
      }
      if (levels >= config.max_depth) {
        halt_reason = "depth_limit";
        break;
      }
      if (budget_check(run.clock.elapsed_s(), levels, config) ==
          BudgetDecision::Halt) {
        halt_reason = run.clock.elapsed_s() > config.t_max_s ? "time_budget"
                                                             : "rollout_budget";
        break;
      }
      const int iteration = levels + 1;
      std::vector<NodeId> children;
      for (NodeId id : to_expand) {
        const std::vector<NodeId> ids =
            run.expand_node(config, backends, id, mix64(config.seed, id),
                            iteration, /*keep_only_best=*/false);
        children.insert(children.end(), ids.begin(), ids.end());
      }
      // Next beam: best `width` children by phi, ties toward the lowest id.
      std::sort(children.begin(), children.end(), [&](NodeId a, NodeId b) {
        const double pa = run.tree.nodes[a].phi, pb = run.tree.nodes[b].phi;
        if (pa != pb) return pa > pb;
        return a < b;
      });
      if (static_cast<int>(children.size()) > width) children.resize(width);
      beam = children;
      levels += 1;
    }
  } catch (const std::exception& e) {
    aborted = true;
    error = e.what();
    halt_reason = std::string("backend-error: ") + e.what();
  }
  return run.finish(levels, halt_reason, aborted, error);
}

RunResult run_strategy(StrategyId strategy, const std::string& root_text,
                       const Config& config, const BackendSet& backends,
                       RunLabels labels) {
  labels.strategy = to_string(strategy);
  switch (strategy) {
    case StrategyId::SSDP:
      return run_search(root_text, config, backends, labels);
    case StrategyId::ParallelNoMerge:
      return run_parallel_no_merge(root_text, config, backends, labels);
    case StrategyId::MCTS:
      return run_mcts(root_text, config, backends, labels);
    case StrategyId::BestOfN:
      return run_best_of_n(root_text, config, backends, labels);
    case StrategyId::Beam:
      return run_beam(root_text, config, backends, labels);
  }
  throw InvalidInputError("unknown strategy id");
}

}  // namespace ssdp
