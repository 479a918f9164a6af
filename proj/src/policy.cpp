#include "ssdp/policy.hpp"

#include <algorithm>
#include <cmath>

namespace ssdp {

int exploit_slot_count(double p, int k) {
  return static_cast<int>(std::floor(p * k + 0.5));
}

double ucb_score(double q, int n_visits, int n_parent_visits, double phi,
                 double w) {
  if (n_visits < 0 || n_parent_visits < 0) {
    throw InvalidInputError("ucb_score: visit counts must be non-negative");
  }
  const double exploitation = n_visits == 0 ? 0.0 : q / n_visits;
  const double exploration =
      w * std::sqrt(1.0 + n_parent_visits) * phi / (1.0 + n_visits);
  return exploitation + exploration;
}

namespace {

int parent_visits(const SearchTree& tree, const SearchNode& n) {
  return n.parent ? tree.nodes[*n.parent].n_visits : 0;
}

// Stable pick of the best remaining candidate: highest key, then lowest id.
template <typename Key>
void sort_by_key_desc(std::vector<NodeId>& ids, Key key) {
  std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
    const double ka = key(a), kb = key(b);
    if (ka != kb) return ka > kb;
    return a < b;
  });
}

}  // namespace

std::vector<SelectedNode> select_frontier_slots(const SearchTree& tree,
                                                const PolicyParams& params) {
  std::vector<NodeId> candidates(tree.frontier.begin(), tree.frontier.end());
  std::vector<SelectedNode> picked;
  if (candidates.empty()) return picked;

  const int want = std::min<int>(params.k, static_cast<int>(candidates.size()));
  const int exploit_want =
      std::min(exploit_slot_count(params.p, params.k), want);

  sort_by_key_desc(candidates,
                   [&](NodeId id) { return tree.nodes[id].phi; });
  picked.reserve(want);
  for (int i = 0; i < exploit_want; ++i) {
    picked.push_back({candidates[i], SlotKind::Exploit});
  }
  candidates.erase(candidates.begin(), candidates.begin() + exploit_want);

  sort_by_key_desc(candidates, [&](NodeId id) {
    const SearchNode& n = tree.nodes[id];
    return ucb_score(n.q, n.n_visits, parent_visits(tree, n), n.phi, params.w);
  });
  for (int i = 0; picked.size() < static_cast<size_t>(want); ++i) {
    picked.push_back({candidates[i], SlotKind::Explore});
  }
  return picked;
}

std::vector<NodeId> select_frontier(const SearchTree& tree,
                                    const PolicyParams& params) {
  std::vector<NodeId> ids;
  for (const SelectedNode& s : select_frontier_slots(tree, params)) {
    ids.push_back(s.id);
  }
  return ids;
}

}  // namespace ssdp
