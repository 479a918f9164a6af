#include <doctest.h>

#include <algorithm>
#include <map>

#include "scripted_backends.hpp"
#include "ssdp/engine.hpp"
#include "ssdp/synthetic.hpp"

using namespace ssdp;

namespace {

std::vector<std::string> event_kinds(const std::string& trace_text) {
  std::vector<std::string> kinds;
  for (const TraceLine& line : parse_trace(trace_text).events) {
    kinds.push_back(line.json.at("ev").get<std::string>());
  }
  return kinds;
}

int count_kind(const std::string& trace_text, const std::string& kind) {
  int n = 0;
  for (const TraceLine& line : parse_trace(trace_text).events) {
    if (line.json.at("ev") == kind) n += 1;
  }
  return n;
}

}  // namespace

TEST_CASE("early_stop_check stops strictly below the scaled mean") {
  RewardStats stats;
  CHECK(early_stop_check(0.0, stats, 0.8) == GateDecision::Continue);
  stats.add(0.5);  // mean 0.5, threshold 0.4
  CHECK(early_stop_check(0.4, stats, 0.8) == GateDecision::Continue);
  CHECK(early_stop_check(0.4 - 1e-12, stats, 0.8) == GateDecision::Stop);
  CHECK(early_stop_check(0.41, stats, 0.8) == GateDecision::Continue);
  CHECK(early_stop_check(0.0, stats, 0.0) == GateDecision::Continue);
}

TEST_CASE("deep_seek_check prunes strictly below the scaled mean") {
  RewardStats stats;
  CHECK(deep_seek_check(0.0, stats, 0.8) == PruneDecision::Keep);
  stats.add(0.9);
  stats.add(0.1);  // mean 0.5, threshold 0.4
  CHECK(deep_seek_check(0.4, stats, 0.8) == PruneDecision::Keep);
  CHECK(deep_seek_check(0.4 - 1e-12, stats, 0.8) == PruneDecision::Prune);
}

TEST_CASE("solution_gate arms at exactly t_star solutions") {
  std::vector<SolutionRecord> sols;
  const int t_star = 5;
  for (NodeId i = 0; i + 1 < static_cast<NodeId>(t_star); ++i) {
    sols.push_back({i, 0.9});
  }
  // t_star - 1 solutions: gate unarmed, everything is pursued.
  CHECK(solution_gate(0.0, sols, t_star) == PursueDecision::Pursue);
  sols.push_back({9, 0.9});  // t_star solutions: armed
  CHECK(solution_gate(0.9, sols, t_star) == PursueDecision::Skip);
  CHECK(solution_gate(0.9 + 1e-12, sols, t_star) == PursueDecision::Pursue);
  sols.push_back({10, 0.2});  // t_star + 1: still gated by the best phi
  CHECK(solution_gate(0.89, sols, t_star) == PursueDecision::Skip);
  CHECK(solution_gate(0.91, sols, t_star) == PursueDecision::Pursue);
}

TEST_CASE("budget_check halts strictly past t_max and at r_max") {
  const Config config;  // t_max_s = 120, r_max = 20
  CHECK(budget_check(120.0, 0, config) == BudgetDecision::Continue);
  CHECK(budget_check(120.0 + 1e-9, 0, config) == BudgetDecision::Halt);
  CHECK(budget_check(0.0, 19, config) == BudgetDecision::Continue);
  CHECK(budget_check(0.0, 20, config) == BudgetDecision::Halt);
  CHECK(budget_check(0.0, 21, config) == BudgetDecision::Halt);
}

TEST_CASE("extract_answer picks the best terminal, ties toward the lowest id") {
  SearchTree tree = create_tree("r");
  CHECK(!extract_answer(tree).has_value());
  add_child(tree, 0, "t1", 0.8, true);  // id 1
  add_child(tree, 0, "t2", 0.8, true);  // id 2
  add_child(tree, 0, "t3", 0.3, true);  // id 3
  const auto best = extract_answer(tree);
  REQUIRE(best.has_value());
  CHECK(best->node == 1);
  CHECK(best->text == "t1");
  CHECK(best->phi == 0.8);
}

namespace {

// Root expands to two near-duplicates (0 and 5 degrees apart) plus one
// orthogonal sibling; at tau = 0.9 the duplicates merge and the best-phi
// member X survives.
std::shared_ptr<scripted::Script> merge_script() {
  auto script = std::make_shared<scripted::Script>();
  script->expansions["R"] = {
      {"X", 0.9, false, scripted::planar(2, 0, 1, 0.0)},
      {"Y", 0.8, false, scripted::planar(2, 0, 1, 5.0)},
      {"Z", 0.2, false, scripted::planar(2, 0, 1, 90.0)},
  };
  script->expand_cost_s = 0.3;
  script->score_cost_s = 0.1;
  script->embed_cost_s = 0.05;
  return script;
}

Config merge_config() {
  Config config;
  config.b = 3;
  config.tau = 0.9;
  config.r_max = 1;
  return config;
}

}  // namespace

TEST_CASE("one round merges redundant siblings and backpropagates survivors") {
  const auto result =
      run_search("R", merge_config(), scripted::make_backends(merge_script()));
  CHECK(!result.aborted);
  CHECK(result.halt_reason == "rollout_budget");

  const SearchTree& tree = result.tree;
  REQUIRE(tree.nodes.size() == 4);
  CHECK(tree.nodes[1].state == NodeState::Frontier);   // X survives
  CHECK(tree.nodes[2].state == NodeState::Merged);     // Y folded into X
  CHECK(tree.nodes[3].state == NodeState::Frontier);   // Z untouched
  CHECK(!tree.nodes[2].embedding.has_value());
  CHECK(tree.nodes[1].embedding.has_value());

  // Only the survivors X and Z backpropagate: root sees phi(X) + phi(Z).
  CHECK(tree.nodes[0].q == doctest::Approx(1.1).epsilon(1e-12));
  CHECK(tree.nodes[0].n_visits == 2);
  CHECK(tree.nodes[1].n_visits == 1);
  CHECK(tree.nodes[2].n_visits == 0);

  CHECK(result.metrics.nodes_generated == 4);
  CHECK(result.metrics.nodes_explored == 1);
  CHECK(result.metrics.nodes_merged == 1);
  CHECK(result.metrics.rollouts_completed == 1);
  // 0.3 expand + 3 * (0.1 score + 0.05 embed) on the simulated clock.
  CHECK(result.metrics.wall_time_s == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(!result.metrics.answer.has_value());

  const std::vector<std::string> expected = {
      "NodeCreated",  // root
      "NodeExpanded", "NodeCreated", "NodeScored", "NodeEmbedded",
      "NodeCreated", "NodeScored", "NodeEmbedded",
      "NodeCreated", "NodeScored", "NodeEmbedded",
      "ClusterFormed", "NodeMerged", "Backprop", "Backprop", "Halt"};
  CHECK(event_kinds(result.trace->str()) == expected);

  // The cluster event names the merged pair and its representative.
  const TraceDoc doc = parse_trace(result.trace->str());
  for (const TraceLine& line : doc.events) {
    if (line.json.at("ev") == "ClusterFormed") {
      CHECK(line.json.at("members") == std::vector<NodeId>{1, 2});
      CHECK(line.json.at("representative") == 1);
      CHECK(line.json.at("tau") == 0.9);
    }
    if (line.json.at("ev") == "NodeMerged") {
      CHECK(line.json.at("node") == 2);
      CHECK(line.json.at("into") == 1);
    }
  }
}

TEST_CASE("disabled merging still embeds children but never clusters") {
  Config config = merge_config();
  config.merge_mode = MergeMode::Disabled;
  const auto result =
      run_search("R", config, scripted::make_backends(merge_script()));
  CHECK(!result.aborted);
  const std::string trace = result.trace->str();
  CHECK(count_kind(trace, "NodeEmbedded") == 3);
  CHECK(count_kind(trace, "ClusterFormed") == 0);
  CHECK(count_kind(trace, "NodeMerged") == 0);
  CHECK(result.metrics.nodes_merged == 0);
  // All three children survive and backpropagate.
  CHECK(result.tree.nodes[0].n_visits == 3);
  CHECK(result.tree.nodes[0].q == doctest::Approx(1.9).epsilon(1e-12));
  for (NodeId id : {1, 2, 3}) {
    CHECK(result.tree.nodes[id].state == NodeState::Frontier);
    CHECK(result.tree.nodes[id].embedding.has_value());
  }
}

TEST_CASE("centroid merging replaces the representative embedding") {
  Config config = merge_config();
  config.merge_mode = MergeMode::Centroid;
  const auto result =
      run_search("R", config, scripted::make_backends(merge_script()));
  CHECK(!result.aborted);
  // X's embedding becomes the normalized mean of X and Y: the 2.5-degree axis.
  const Embedding expected = scripted::planar(2, 0, 1, 2.5);
  REQUIRE(result.tree.nodes[1].embedding.has_value());
  CHECK((*result.tree.nodes[1].embedding)[0] ==
        doctest::Approx(expected[0]).epsilon(1e-12));
  CHECK((*result.tree.nodes[1].embedding)[1] ==
        doctest::Approx(expected[1]).epsilon(1e-12));
  // The replacement embedding is re-recorded so replay sees final payloads.
  CHECK(count_kind(result.trace->str(), "NodeEmbedded") == 4);
}

TEST_CASE("a low-phi parent is pruned by the early-stop gate before expanding") {
  auto script = std::make_shared<scripted::Script>();
  script->expansions["R"] = {
      {"A", 0.9, false, scripted::planar(2, 0, 1, 0.0)},
      {"B", 0.1, false, scripted::planar(2, 0, 1, 90.0)},
  };
  script->expansions["A"] = {
      {"A1 The answer is 42", 0.95, true, {}},
  };
  Config config;
  config.b = 2;
  const auto result =
      run_search("R", config, scripted::make_backends(script));
  CHECK(!result.aborted);
  // Round 2 mean reward is 0.5, so B (phi 0.1 < 0.8 * 0.5) is pruned while A
  // expands into a terminal; round 3 finds the frontier empty.
  CHECK(result.halt_reason == "frontier_exhausted");
  CHECK(result.tree.nodes[2].state == NodeState::PrunedEarlyStop);
  CHECK(result.tree.nodes[3].state == NodeState::Terminal);
  CHECK(result.metrics.rollouts_completed == 2);
  REQUIRE(result.metrics.answer.has_value());
  CHECK(*result.metrics.answer == "A1 The answer is 42");
  CHECK(result.metrics.answer_phi == 0.95);
  REQUIRE(result.metrics.solutions.size() == 1);
  CHECK(result.metrics.solutions[0].node == 3);

  bool saw_prune = false;
  for (const TraceLine& line : parse_trace(result.trace->str()).events) {
    if (line.json.at("ev") == "NodePruned") {
      saw_prune = true;
      CHECK(line.json.at("node") == 2);
      CHECK(line.json.at("reason") == "early_stop");
    }
  }
  CHECK(saw_prune);
  // Terminal reward flows back: root accumulates A, B, then A1.
  CHECK(result.tree.nodes[0].q == doctest::Approx(1.95).epsilon(1e-12));
  CHECK(result.tree.nodes[0].n_visits == 3);
  CHECK(result.tree.nodes[1].n_visits == 2);
}

TEST_CASE("deep-seek pruning applies to explore-slot children only") {
  auto script = std::make_shared<scripted::Script>();
  script->expansions["R"] = {
      {"P", 0.6, false, scripted::planar(2, 0, 1, 0.0)},
      {"Q", 0.5, false, scripted::planar(2, 0, 1, 90.0)},
  };
  script->expansions["P"] = {{"C1", 0.3, false, scripted::planar(2, 0, 1, 0.0)}};
  script->expansions["Q"] = {{"C2", 0.3, false, scripted::planar(2, 0, 1, 90.0)}};
  Config config;
  config.b = 2;
  config.k = 2;
  config.r_max = 2;
  const auto result =
      run_search("R", config, scripted::make_backends(script));
  CHECK(!result.aborted);
  CHECK(result.halt_reason == "rollout_budget");

  // Round 2 selects P for the exploit slot and Q for the explore slot. Both
  // children score 0.3, below 0.8 * mean(0.6, 0.5) = 0.44, but only the
  // explore-slot child C2 is subject to the deep-seek gate.
  const SearchTree& tree = result.tree;
  REQUIRE(tree.nodes.size() == 5);
  CHECK(tree.nodes[3].text == "C1");
  CHECK(tree.nodes[3].state == NodeState::Frontier);
  CHECK(tree.nodes[3].embedding.has_value());
  CHECK(tree.nodes[4].text == "C2");
  CHECK(tree.nodes[4].state == NodeState::PrunedDeepSeek);
  CHECK(!tree.nodes[4].embedding.has_value());

  const std::string trace = result.trace->str();
  CHECK(count_kind(trace, "NodePruned") == 1);
  CHECK(count_kind(trace, "Backprop") == 3);  // P, Q, then C1 only
  for (const TraceLine& line : parse_trace(trace).events) {
    if (line.json.at("ev") == "NodePruned") {
      CHECK(line.json.at("node") == 4);
      CHECK(line.json.at("reason") == "deep_seek");
    }
  }
  CHECK(tree.nodes[0].n_visits == 3);
  CHECK(tree.nodes[1].q == doctest::Approx(0.9).epsilon(1e-12));  // 0.6 + 0.3
  CHECK(tree.nodes[2].q == doctest::Approx(0.5).epsilon(1e-12));  // no child
}

TEST_CASE("a round where every parent fails the solution gate stalls the run") {
  auto script = std::make_shared<scripted::Script>();
  script->expansions["R"] = {
      {"T The answer is 7", 0.9, true, {}},
      {"U", 0.7, false, scripted::planar(2, 0, 1, 0.0)},
  };
  Config config;
  config.b = 2;
  config.t_star = 1;
  const auto result =
      run_search("R", config, scripted::make_backends(script));
  CHECK(!result.aborted);
  // Round 2: U passes early-stop (0.7 >= 0.8 * 0.8) but the armed solution
  // gate demands phi > 0.9, so nothing is expanded and the run stalls.
  CHECK(result.halt_reason == "stalled");
  CHECK(result.metrics.rollouts_completed == 2);
  CHECK(result.tree.nodes[2].state == NodeState::Frontier);
  REQUIRE(result.metrics.answer.has_value());
  CHECK(*result.metrics.answer == "T The answer is 7");
}

TEST_CASE("the time budget is strict: a round at exactly t_max still runs") {
  auto script = std::make_shared<scripted::Script>();
  script->expansions["R"] = {{"A", 0.5, false, scripted::planar(2, 0, 1, 0.0)}};
  script->expansions["A"] = {{"B The answer is 3", 0.9, true, {}}};
  script->expand_cost_s = 0.3;
  Config config;
  config.b = 1;
  config.t_max_s = 0.3;
  const auto result =
      run_search("R", config, scripted::make_backends(script));
  CHECK(!result.aborted);
  // After round 1 the simulated clock reads exactly 0.3 == t_max, which does
  // not halt; round 2 runs and pushes the clock past the budget.
  CHECK(result.halt_reason == "time_budget");
  CHECK(result.metrics.rollouts_completed == 2);
  CHECK(result.metrics.wall_time_s == doctest::Approx(0.6).epsilon(1e-12));
  REQUIRE(result.metrics.answer.has_value());
}

TEST_CASE("an all-terminal expansion exhausts the frontier") {
  auto script = std::make_shared<scripted::Script>();
  script->expansions["R"] = {
      {"T1 The answer is 1", 0.6, true, {}},
      {"T2 The answer is 2", 0.8, true, {}},
  };
  Config config;
  config.b = 2;
  const auto result =
      run_search("R", config, scripted::make_backends(script));
  CHECK(!result.aborted);
  CHECK(result.halt_reason == "frontier_exhausted");
  CHECK(result.metrics.rollouts_completed == 1);
  CHECK(result.metrics.nodes_explored == 1);
  CHECK(result.metrics.solutions.size() == 2);
  CHECK(result.tree.nodes[0].n_visits == 2);  // terminals backpropagate
  CHECK(*result.metrics.answer == "T2 The answer is 2");
  CHECK(count_kind(result.trace->str(), "Solution") == 2);
  CHECK(count_kind(result.trace->str(), "NodeEmbedded") == 0);
}

TEST_CASE("scripted and synthetic runs are byte-for-byte reproducible") {
  const auto a =
      run_search("R", merge_config(), scripted::make_backends(merge_script()));
  const auto b =
      run_search("R", merge_config(), scripted::make_backends(merge_script()));
  CHECK(a.trace->str() == b.trace->str());

  PlantedPathProblem problem;
  problem.seed = 5;
  problem.depth = 4;
  problem.arity = 3;
  problem.dup_rate = 2;
  problem.embedding_dim = 16;
  Config config;
  config.r_max = 6;
  const auto s1 = run_search(problem.statement(), config,
                             make_synthetic_backends(problem));
  const auto s2 = run_search(problem.statement(), config,
                             make_synthetic_backends(problem));
  CHECK(!s1.aborted);
  CHECK(s1.trace->str() == s2.trace->str());
  CHECK(s1.trace->str().size() > 1000);  // a real run, not a stub
}

TEST_CASE("a backend failure aborts the run but keeps a closed trace") {
  auto script = std::make_shared<scripted::Script>();
  script->expansions["R"] = {{"A", 0.5, false, scripted::planar(2, 0, 1, 0.0)}};
  script->expansions["A"] = {{"C", 0.5, false, scripted::planar(2, 0, 1, 0.0)}};
  script->fail_expansion_after = 1;
  Config config;
  config.b = 1;
  const auto result =
      run_search("R", config, scripted::make_backends(script));
  CHECK(result.aborted);
  CHECK(result.error.find("scripted generator failure") != std::string::npos);
  CHECK(result.halt_reason.rfind("backend-error:", 0) == 0);
  CHECK(result.metrics.rollouts_completed == 1);
  // The trace still ends with a Halt event recording the partial run.
  const TraceDoc doc = parse_trace(result.trace->str());
  REQUIRE(!doc.events.empty());
  CHECK(doc.events.back().json.at("ev") == "Halt");
  CHECK(doc.events.back().json.at("reason").get<std::string>().rfind(
            "backend-error:", 0) == 0);
  // The parent whose expansion failed is untouched.
  CHECK(result.tree.nodes[1].state == NodeState::Frontier);
}

TEST_CASE("run_search validates its inputs up front") {
  Config bad;
  bad.b = 0;
  CHECK_THROWS_AS(
      run_search("R", bad, scripted::make_backends(merge_script())),
      InvalidInputError);
  CHECK_THROWS_AS(run_search("R", Config{}, BackendSet{}), InvalidInputError);
}

// Conservation: every created child is accounted for as exactly one of
// merged, deep-seek pruned, or backpropagated (terminals and survivors).
TEST_CASE("each expansion conserves its children across merge and gates") {
  PlantedPathProblem problem;
  problem.seed = 11;
  problem.depth = 5;
  problem.arity = 4;
  problem.dup_rate = 2;
  problem.embedding_dim = 16;
  Config config;
  config.b = 6;
  config.r_max = 10;
  const auto result = run_search(problem.statement(), config,
                                 make_synthetic_backends(problem));
  CHECK(!result.aborted);

  const TraceDoc doc = parse_trace(result.trace->str());
  std::map<int, std::vector<NodeId>> created_by_it;
  std::map<int, std::set<NodeId>> merged_by_it, pruned_by_it, backprop_by_it;
  for (const TraceLine& line : doc.events) {
    const auto& j = line.json;
    const std::string ev = j.at("ev");
    const int it = j.at("it");
    if (ev == "NodeCreated" && j.contains("parent")) {
      created_by_it[it].push_back(j.at("node"));
    } else if (ev == "NodeMerged") {
      merged_by_it[it].insert(j.at("node").get<NodeId>());
    } else if (ev == "NodePruned" && j.at("reason") == "deep_seek") {
      pruned_by_it[it].insert(j.at("node").get<NodeId>());
    } else if (ev == "Backprop") {
      backprop_by_it[it].insert(j.at("leaf").get<NodeId>());
    }
  }
  REQUIRE(!created_by_it.empty());
  for (const auto& [it, created] : created_by_it) {
    for (NodeId id : created) {
      const int merged = merged_by_it[it].count(id);
      const int pruned = pruned_by_it[it].count(id);
      const int backpropagated = backprop_by_it[it].count(id);
      CHECK(merged + pruned + backpropagated == 1);
    }
  }
}
