#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssdp/error.hpp"

namespace ssdp {

// Dense index into SearchTree::nodes. Ids are assigned 0, 1, 2, ... in
// creation order and are never reused; the root is always id 0.
using NodeId = std::uint32_t;

using Embedding = std::vector<double>;

enum class NodeState {
  Frontier,         // leaf eligible for selection
  Expanded,         // has been passed to the generator as a parent
  Merged,           // absorbed into a semantically equivalent sibling
  PrunedEarlyStop,  // rollout terminated early (low reward at selection)
  PrunedDeepSeek,   // child discarded by the deep-seek quality gate
  Terminal,         // complete solution; never expanded
};

const char* to_string(NodeState s);

struct SearchNode {
  NodeId id = 0;
  std::optional<NodeId> parent;  // empty only for the root
  std::vector<NodeId> children;  // creation order
  std::string text;              // reasoning step (root: problem statement)
  std::optional<Embedding> embedding;  // unit-norm once set; dropped on release
  double phi = 0.0;              // reward-model score, in [0, 1]
  double q = 0.0;                // sum of backpropagated rewards
  int n_visits = 0;              // backpropagation count
  int depth = 0;                 // root = 0
  NodeState state = NodeState::Frontier;
  bool payload_released = false; // embedding dropped after merge/prune
};

// Append-only arena. Nodes are never deleted; merging and pruning are state
// transitions that release the node's payload but keep it addressable so
// traces can be replayed. Invariants:
//   - nodes_generated == nodes.size()
//   - frontier holds exactly the ids in state Frontier, terminals likewise
//   - frontier and terminals are disjoint
//   - child depth == parent depth + 1
struct SearchTree {
  std::vector<SearchNode> nodes;
  std::set<NodeId> frontier;
  std::set<NodeId> terminals;
  std::int64_t nodes_generated = 0;
  std::int64_t nodes_explored = 0;  // nodes ever moved Frontier -> Expanded

  SearchNode& at(NodeId id);
  const SearchNode& at(NodeId id) const;
  bool contains(NodeId id) const { return id < nodes.size(); }
};

// Creates a tree holding only the root (id 0, depth 0, state Frontier).
// Throws InvalidInputError if root_text is empty.
SearchTree create_tree(std::string root_text);

// Appends a child under `parent` and returns its id. The child starts in
// state Frontier (or Terminal when `terminal` is set, in which case it is
// recorded as a solution leaf instead of entering the frontier).
// Throws NotFoundError for an unknown parent and IllegalStateError when the
// parent is Merged, Pruned*, or Terminal.
NodeId add_child(SearchTree& tree, NodeId parent, std::string text, double phi,
                 bool terminal = false);

// Adds `reward` to q and 1 to n_visits on `leaf` and every ancestor up to
// and including the root. Throws NotFoundError for an unknown leaf.
void backpropagate(SearchTree& tree, NodeId leaf, double reward);

// Transitions `id` to `next`. Only transitions out of Frontier are legal:
//   Frontier -> Expanded | Merged | PrunedEarlyStop | PrunedDeepSeek | Terminal
// Merged/Pruned* release the node payload (embedding dropped). Frontier and
// terminal sets and the nodes_explored counter are kept consistent.
// Throws NotFoundError / IllegalStateError.
void mark_state(SearchTree& tree, NodeId id, NodeState next);

// Attaches a unit-norm embedding to a live node. Throws NotFoundError,
// IllegalStateError (payload already released), or InvalidInputError when
// the vector is not unit-norm within 1e-6.
void set_embedding(SearchTree& tree, NodeId id, Embedding embedding);

}  // namespace ssdp
