#include "ssdp/tree.hpp"

#include <cmath>
#include <utility>

namespace ssdp {

namespace {

std::string describe(NodeId id) { return "node " + std::to_string(id); }

}  // namespace

const char* to_string(NodeState s) {
  switch (s) {
    case NodeState::Frontier: return "Frontier";
    case NodeState::Expanded: return "Expanded";
    case NodeState::Merged: return "Merged";
    case NodeState::PrunedEarlyStop: return "PrunedEarlyStop";
    case NodeState::PrunedDeepSeek: return "PrunedDeepSeek";
    case NodeState::Terminal: return "Terminal";
  }
  return "?";
}

SearchNode& SearchTree::at(NodeId id) {
  if (!contains(id)) throw NotFoundError(describe(id) + " does not exist");
  return nodes[id];
}

const SearchNode& SearchTree::at(NodeId id) const {
  if (!contains(id)) throw NotFoundError(describe(id) + " does not exist");
  return nodes[id];
}

SearchTree create_tree(std::string root_text) {
  if (root_text.empty()) throw InvalidInputError("root text must be non-empty");
  SearchTree tree;
  SearchNode root;
  root.id = 0;
  root.text = std::move(root_text);
  tree.nodes.push_back(std::move(root));
  tree.frontier.insert(0);
  tree.nodes_generated = 1;
  return tree;
}

NodeId add_child(SearchTree& tree, NodeId parent, std::string text, double phi,
                 bool terminal) {
  SearchNode& p = tree.at(parent);
  switch (p.state) {
    case NodeState::Frontier:
    case NodeState::Expanded:
      break;
    default:
      throw IllegalStateError("cannot add a child under " + describe(parent) +
                              " in state " + to_string(p.state));
  }
  const NodeId id = static_cast<NodeId>(tree.nodes.size());
  SearchNode child;
  child.id = id;
  child.parent = parent;
  child.text = std::move(text);
  child.phi = phi;
  child.depth = p.depth + 1;
  child.state = terminal ? NodeState::Terminal : NodeState::Frontier;
  tree.nodes.push_back(std::move(child));
  tree.nodes[parent].children.push_back(id);
  if (terminal) {
    tree.terminals.insert(id);
  } else {
    tree.frontier.insert(id);
  }
  tree.nodes_generated += 1;
  return id;
}

void backpropagate(SearchTree& tree, NodeId leaf, double reward) {
  NodeId cur = tree.at(leaf).id;
  for (;;) {
    SearchNode& n = tree.nodes[cur];
    n.q += reward;
    n.n_visits += 1;
    if (!n.parent) break;
    cur = *n.parent;
  }
}

void mark_state(SearchTree& tree, NodeId id, NodeState next) {
  SearchNode& n = tree.at(id);
  if (n.state != NodeState::Frontier || next == NodeState::Frontier) {
    throw IllegalStateError("illegal transition for " + describe(id) + ": " +
                            to_string(n.state) + " -> " + to_string(next));
  }
  tree.frontier.erase(id);
  n.state = next;
  switch (next) {
    case NodeState::Expanded:
      tree.nodes_explored += 1;
      break;
    case NodeState::Terminal:
      tree.terminals.insert(id);
      break;
    case NodeState::Merged:
    case NodeState::PrunedEarlyStop:
    case NodeState::PrunedDeepSeek:
      n.embedding.reset();
      n.payload_released = true;
      break;
    default:
      break;
  }
}

void set_embedding(SearchTree& tree, NodeId id, Embedding embedding) {
  SearchNode& n = tree.at(id);
  if (n.payload_released) {
    throw IllegalStateError(describe(id) + " payload already released");
  }
  double sq = 0.0;
  for (double v : embedding) sq += v * v;
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
    throw InvalidInputError("embedding for " + describe(id) +
                            " is not unit-norm");
  }
  n.embedding = std::move(embedding);
}

}  // namespace ssdp
