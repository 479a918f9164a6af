#pragma once

#include <vector>

#include "ssdp/tree.hpp"

namespace ssdp {

struct PolicyParams {
  int k = 4;        // selection width per round
  double w = 0.7071067811865476;  // exploration weight, 1/sqrt(2)
  double p = 0.5;   // fraction of slots reserved for exploitation
};

// round(p * k) with ties rounded up ("round half up"): 0.5 -> 1, 1.5 -> 2.
int exploit_slot_count(double p, int k);

// UCB value for a node:
//   exploitation + w * sqrt(1 + n_parent_visits) * phi / (1 + n_visits)
// where exploitation is q / n_visits, defined as 0 when n_visits == 0 (an
// unvisited node has no empirical mean yet; its prior phi carries the score).
// Throws InvalidInputError on negative visit counts.
double ucb_score(double q, int n_visits, int n_parent_visits, double phi,
                 double w);

enum class SlotKind { Exploit, Explore };

struct SelectedNode {
  NodeId id;
  SlotKind slot;
};

// Picks up to k frontier nodes for expansion. The first round(p * k) slots go
// to the highest-phi frontier nodes (exploitation); the remaining slots go to
// the highest-UCB nodes among those not yet chosen (exploration). All ties
// break toward the lowest NodeId. Returns fewer than k entries when the
// frontier is smaller; an empty frontier yields an empty list.
std::vector<SelectedNode> select_frontier_slots(const SearchTree& tree,
                                                const PolicyParams& params);

// Same selection, ids only (in slot order).
std::vector<NodeId> select_frontier(const SearchTree& tree,
                                    const PolicyParams& params);

}  // namespace ssdp
