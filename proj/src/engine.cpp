#include "ssdp/engine.hpp"

#include <algorithm>
#include <future>

#include "ssdp/hash.hpp"
#include "ssdp/merge.hpp"
#include "ssdp/policy.hpp"

namespace ssdp {

GateDecision early_stop_check(double phi, const RewardStats& stats,
                              double lambda_es) {
  if (stats.count > 0 && phi < lambda_es * stats.mean()) {
    return GateDecision::Stop;
  }
  return GateDecision::Continue;
}

PruneDecision deep_seek_check(double phi, const RewardStats& stats,
                              double lambda_ds) {
  if (stats.count > 0 && phi < lambda_ds * stats.mean()) {
    return PruneDecision::Prune;
  }
  return PruneDecision::Keep;
}

PursueDecision solution_gate(double candidate_phi,
                             const std::vector<SolutionRecord>& solutions,
                             int t_star) {
  if (static_cast<int>(solutions.size()) < t_star) return PursueDecision::Pursue;
  double best = solutions.front().phi;
  for (const SolutionRecord& s : solutions) best = std::max(best, s.phi);
  return candidate_phi > best ? PursueDecision::Pursue : PursueDecision::Skip;
}

BudgetDecision budget_check(double elapsed_s, int rollouts_completed,
                            const Config& config) {
  if (elapsed_s > config.t_max_s) return BudgetDecision::Halt;
  if (rollouts_completed >= config.r_max) return BudgetDecision::Halt;
  return BudgetDecision::Continue;
}

std::optional<ExtractedAnswer> extract_answer(const SearchTree& tree) {
  std::optional<ExtractedAnswer> best;
  for (NodeId id : tree.terminals) {  // ascending, so ties keep the lowest id
    const SearchNode& n = tree.nodes[id];
    if (!best || n.phi > best->phi) best = ExtractedAnswer{id, n.text, n.phi};
  }
  return best;
}

void count_tree_metrics(const SearchTree& tree, RunMetrics& metrics) {
  metrics.nodes_generated = tree.nodes_generated;
  metrics.nodes_explored = tree.nodes_explored;
  metrics.nodes_merged = 0;
  for (const SearchNode& n : tree.nodes) {
    if (n.state == NodeState::Merged) metrics.nodes_merged += 1;
  }
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

enum class ParentAction { Expand, PruneEarlyStop, Skip };

struct ScoredCandidate {
  Candidate candidate;
  ScoreResult score;
  bool deep_seek_pruned = false;
  std::optional<EmbedResult> embed;  // raw; present only for kept children
};

struct ExpansionWork {
  std::vector<ScoredCandidate> children;
};

}  // namespace

RunResult run_search(const std::string& root_text, const Config& config,
                     const BackendSet& backends, const RunLabels& labels) {
  config.validate();
  if (!backends.generator || !backends.reward || !backends.embedding) {
    throw InvalidInputError("run_search: all three backends are required");
  }

  RunResult result;
  result.tree = create_tree(root_text);
  SearchTree& tree = result.tree;
  RunClock clock(config.clock_mode);
  result.trace = std::make_shared<TraceLog>(
      labels.run_id, labels.strategy, config.seed, to_string(config.clock_mode),
      nlohmann::ordered_json::parse(config_to_json(config)), labels.problem);
  TraceLog& trace = *result.trace;
  trace.node_created(0, clock.elapsed_s(), 0, std::nullopt, 0, root_text, 0.0,
                     false, std::nullopt);

  RewardStats stats;
  std::vector<SolutionRecord> solutions;
  const PolicyParams policy_params{config.k, config.w, config.p};
  const MergePolicy merge_policy{config.tau, config.merge_mode};
  int rollouts = 0;
  std::string halt_reason;

  try {
    for (;;) {
      if (budget_check(clock.elapsed_s(), rollouts, config) ==
          BudgetDecision::Halt) {
        halt_reason = clock.elapsed_s() > config.t_max_s ? "time_budget"
                                                         : "rollout_budget";
        break;
      }
      if (tree.frontier.empty()) {
        halt_reason = "frontier_exhausted";
        break;
      }
      const int iteration = rollouts + 1;

      // Gates for this whole round run against the round-start snapshot, so
      // the per-parent evaluation below is order-independent.
      const RewardStats stats_snapshot = stats;
      const std::vector<SolutionRecord> solutions_snapshot = solutions;

      const std::vector<SelectedNode> selected =
          select_frontier_slots(tree, policy_params);
      std::vector<ParentAction> actions(selected.size());
      std::vector<std::future<ExpansionWork>> work(selected.size());
      for (size_t i = 0; i < selected.size(); ++i) {
        const SearchNode& node = tree.nodes[selected[i].id];
        if (early_stop_check(node.phi, stats_snapshot, config.lambda_es) ==
            GateDecision::Stop) {
          actions[i] = ParentAction::PruneEarlyStop;
          continue;
        }
        if (solution_gate(node.phi, solutions_snapshot, config.t_star) ==
            PursueDecision::Skip) {
          actions[i] = ParentAction::Skip;
          continue;
        }
        actions[i] = ParentAction::Expand;
        const bool explore_slot = selected[i].slot == SlotKind::Explore;
        const std::uint64_t expand_seed =
            splitmix64(config.seed ^ splitmix64(selected[i].id));
        work[i] = std::async(
            std::launch::async,
            [&backends, &config, &stats_snapshot, explore_slot, expand_seed,
             path = path_texts(tree, selected[i].id)]() {
              ExpansionWork w;
              std::vector<Candidate> candidates =
                  backends.generator->expand(path, config.b, expand_seed);
              w.children.reserve(candidates.size());
              for (Candidate& c : candidates) {
                std::vector<std::string> child_path = path;
                child_path.push_back(c.text);
                ScoredCandidate sc;
                sc.score = backends.reward->score(child_path);
                sc.candidate = std::move(c);
                sc.deep_seek_pruned =
                    !sc.candidate.terminal && explore_slot &&
                    deep_seek_check(sc.score.phi, stats_snapshot,
                                    config.lambda_ds) == PruneDecision::Prune;
                if (!sc.candidate.terminal && !sc.deep_seek_pruned) {
                  sc.embed = backends.embedding->embed(sc.candidate.text);
                }
                w.children.push_back(std::move(sc));
              }
              return w;
            });
      }

      // Apply results in selection order; all tree mutation, clock
      // accounting, and trace emission happen here, serially.
      bool mutated = false;
      for (size_t i = 0; i < selected.size(); ++i) {
        const NodeId parent = selected[i].id;
        switch (actions[i]) {
          case ParentAction::Skip:
            continue;
          case ParentAction::PruneEarlyStop:
            mark_state(tree, parent, NodeState::PrunedEarlyStop);
            trace.node_pruned(iteration, clock.elapsed_s(), parent,
                              "early_stop");
            mutated = true;
            continue;
          case ParentAction::Expand:
            break;
        }
        const ExpansionWork w = work[i].get();
        mutated = true;
        mark_state(tree, parent, NodeState::Expanded);
        double expand_cost = 0.0;
        for (const ScoredCandidate& sc : w.children) {
          expand_cost += sc.candidate.cost_s;
        }
        clock.advance(expand_cost);
        trace.node_expanded(iteration, clock.elapsed_s(), parent, expand_cost);

        std::vector<NodeId> to_merge;
        std::vector<NodeId> to_backprop;
        for (const ScoredCandidate& sc : w.children) {
          const NodeId id = add_child(tree, parent, sc.candidate.text,
                                      sc.score.phi, sc.candidate.terminal);
          trace.node_created(iteration, clock.elapsed_s(), id, parent,
                             tree.nodes[id].depth, sc.candidate.text,
                             sc.score.phi, sc.candidate.terminal,
                             sc.candidate.group);
          clock.advance(sc.score.cost_s);
          trace.node_scored(iteration, clock.elapsed_s(), id, sc.score.phi,
                            sc.score.cost_s);
          stats.add(sc.score.phi);
          if (sc.candidate.terminal) {
            solutions.push_back({id, sc.score.phi});
            trace.solution(iteration, clock.elapsed_s(), id, sc.score.phi);
            to_backprop.push_back(id);
          } else if (sc.deep_seek_pruned) {
            mark_state(tree, id, NodeState::PrunedDeepSeek);
            trace.node_pruned(iteration, clock.elapsed_s(), id, "deep_seek");
          } else {
            clock.advance(sc.embed->cost_s);
            set_embedding(tree, id, normalize(sc.embed->raw));
            trace.node_embedded(iteration, clock.elapsed_s(), id,
                                sc.embed->cost_s, *tree.nodes[id].embedding);
            to_merge.push_back(id);
          }
        }

        std::vector<NodeId> survivors = to_merge;
        if (config.merge_mode != MergeMode::Disabled && !to_merge.empty()) {
          std::vector<Cluster> clusters;
          survivors = merge_and_prune(tree, to_merge, merge_policy, &clusters);
          for (const Cluster& c : clusters) {
            if (c.members.size() < 2) continue;
            trace.cluster_formed(iteration, clock.elapsed_s(), parent,
                                 c.members, c.representative, config.tau);
            for (NodeId m : c.members) {
              if (m != c.representative) {
                trace.node_merged(iteration, clock.elapsed_s(), m,
                                  c.representative);
              }
            }
            if (config.merge_mode == MergeMode::Centroid) {
              // The centroid replaced the representative's embedding; record
              // it so replay reconstructs the exact final payloads.
              trace.node_embedded(iteration, clock.elapsed_s(),
                                  c.representative, 0.0,
                                  *tree.nodes[c.representative].embedding);
            }
          }
        }
        to_backprop.insert(to_backprop.end(), survivors.begin(),
                           survivors.end());
        std::sort(to_backprop.begin(), to_backprop.end());
        for (NodeId id : to_backprop) {
          backpropagate(tree, id, tree.nodes[id].phi);
          trace.backprop(iteration, clock.elapsed_s(), id, tree.nodes[id].phi);
        }
      }

      rollouts += 1;
      if (!mutated) {
        halt_reason = "stalled";
        break;
      }
    }
  } catch (const std::exception& e) {
    result.aborted = true;
    result.error = e.what();
    halt_reason = std::string("backend-error: ") + e.what();
  }

  result.metrics.rollouts_completed = rollouts;
  result.metrics.wall_time_s = clock.elapsed_s();
  result.metrics.solutions = solutions;
  count_tree_metrics(tree, result.metrics);
  if (const auto answer = extract_answer(tree)) {
    result.metrics.answer = answer->text;
    result.metrics.answer_phi = answer->phi;
  }
  result.halt_reason = halt_reason;
  trace.halt(rollouts, clock.elapsed_s(), halt_reason, result.metrics);
  return result;
}

}  // namespace ssdp
