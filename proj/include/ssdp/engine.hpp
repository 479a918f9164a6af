#pragma once

#include <memory>
#include <optional>
#include <string>

#include "ssdp/backends.hpp"
#include "ssdp/clock.hpp"
#include "ssdp/config.hpp"
#include "ssdp/metrics.hpp"
#include "ssdp/trace.hpp"
#include "ssdp/tree.hpp"

namespace ssdp {

// ===== Gates =====
//
// All gates are pure functions of their inputs. Within one selection round
// the engine evaluates every gate against the stats/solutions state captured
// at round start, so the per-parent work of a round is order-independent.

enum class GateDecision { Continue, Stop };
enum class PruneDecision { Keep, Prune };
enum class PursueDecision { Pursue, Skip };
enum class BudgetDecision { Continue, Halt };

// Stop iff at least one reward has been observed and phi < lambda_es * mean.
GateDecision early_stop_check(double phi, const RewardStats& stats,
                              double lambda_es);

// Prune iff at least one reward has been observed and phi < lambda_ds * mean.
// Applied only to children of exploration-slot parents.
PruneDecision deep_seek_check(double phi, const RewardStats& stats,
                              double lambda_ds);

// Once t_star solutions exist, a node is pursued only when its phi strictly
// exceeds the best solution phi seen so far.
PursueDecision solution_gate(double candidate_phi,
                             const std::vector<SolutionRecord>& solutions,
                             int t_star);

// Halt iff elapsed_s > t_max_s (strict) or rollouts_completed >= r_max.
BudgetDecision budget_check(double elapsed_s, int rollouts_completed,
                            const Config& config);

// Best terminal by phi, ties toward the lowest id; absent when the tree has
// no terminals.
struct ExtractedAnswer {
  NodeId node;
  std::string text;
  double phi;
};
std::optional<ExtractedAnswer> extract_answer(const SearchTree& tree);

// ===== Engine =====

struct RunLabels {
  std::string run_id = "run";
  std::string strategy = "SSDP";
  nlohmann::ordered_json problem = nlohmann::ordered_json::object();
};

struct RunResult {
  SearchTree tree;
  RunMetrics metrics;
  std::shared_ptr<TraceLog> trace;
  std::string halt_reason;
  bool aborted = false;       // a backend failed; trace is partial
  std::string error;          // failure description when aborted
};

// Runs the full search loop: select up to k frontier nodes (exploit slots by
// phi, explore slots by UCB), expand each surviving parent with b children,
// score, gate, embed, merge semantically redundant siblings, attach
// survivors, and backpropagate. One rollout = one selection round. Expansion
// and scoring of a round's parents may run concurrently; results are applied
// in selection order, so traces are deterministic for deterministic backends.
//
// Halts on: budget (time or rollouts), empty frontier, a round that changes
// nothing (every selected node failed the solution gate), or backend failure
// (result flagged aborted, partial trace retained).
RunResult run_search(const std::string& root_text, const Config& config,
                     const BackendSet& backends, const RunLabels& labels = {});

// Fills the counter fields of RunMetrics from the final tree state.
void count_tree_metrics(const SearchTree& tree, RunMetrics& metrics);

}  // namespace ssdp
