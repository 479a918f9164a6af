#include "ssdp/merge.hpp"

#include <algorithm>
#include <cmath>

namespace ssdp {

const char* to_string(MergeMode m) {
  switch (m) {
    case MergeMode::BestScore: return "best_score";
    case MergeMode::Centroid: return "centroid";
    case MergeMode::Disabled: return "disabled";
  }
  return "?";
}

MergeMode merge_mode_from_string(const std::string& s) {
  if (s == "best_score") return MergeMode::BestScore;
  if (s == "centroid") return MergeMode::Centroid;
  if (s == "disabled") return MergeMode::Disabled;
  throw InvalidInputError("unknown merge mode: " + s);
}

Embedding normalize(const Embedding& v) {
  if (v.empty()) throw InvalidInputError("normalize: empty vector");
  double sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw InvalidInputError("normalize: non-finite component");
    }
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm < 1e-12) {
    throw DegenerateEmbeddingError("normalize: zero vector");
  }
  Embedding out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return out;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.empty() || a.size() != b.size()) {
    throw InvalidInputError("cosine_similarity: dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  if (denom < 1e-12) {
    throw DegenerateEmbeddingError("cosine_similarity: zero vector");
  }
  return std::clamp(dot / denom, -1.0, 1.0);
}

std::vector<std::vector<NodeId>> cluster_siblings(
    const std::vector<std::pair<NodeId, Embedding>>& siblings, double tau) {
  const size_t n = siblings.size();
  // Union-find over sibling positions; an edge wherever similarity >= tau.
  std::vector<size_t> root(n);
  for (size_t i = 0; i < n; ++i) root[i] = i;
  auto find = [&](size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (cosine_similarity(siblings[i].second, siblings[j].second) >= tau) {
        root[find(i)] = find(j);
      }
    }
  }
  std::vector<std::vector<NodeId>> groups(n);
  for (size_t i = 0; i < n; ++i) groups[find(i)].push_back(siblings[i].first);
  std::vector<std::vector<NodeId>> out;
  for (auto& g : groups) {
    if (g.empty()) continue;
    std::sort(g.begin(), g.end());
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

RepresentativeChoice select_representative(
    const std::vector<ClusterMember>& members, const MergePolicy& policy) {
  if (members.empty()) {
    throw InvalidInputError("select_representative: empty cluster");
  }
  const ClusterMember* best = &members[0];
  for (const ClusterMember& m : members) {
    if (m.phi > best->phi || (m.phi == best->phi && m.id < best->id)) {
      best = &m;
    }
  }
  RepresentativeChoice choice{best->id, std::nullopt};
  if (policy.mode == MergeMode::Centroid && members.size() > 1) {
    const Embedding* first = members[0].embedding;
    if (!first) {
      throw InvalidInputError("select_representative: centroid mode needs embeddings");
    }
    Embedding mean(first->size(), 0.0);
    for (const ClusterMember& m : members) {
      if (!m.embedding || m.embedding->size() != mean.size()) {
        throw InvalidInputError("select_representative: centroid mode needs embeddings");
      }
      for (size_t i = 0; i < mean.size(); ++i) mean[i] += (*m.embedding)[i];
    }
    for (double& x : mean) x /= static_cast<double>(members.size());
    double sq = 0.0;
    for (double x : mean) sq += x * x;
    // Opposing members can cancel out; keep the representative's own
    // embedding rather than normalizing a near-zero mean.
    if (std::sqrt(sq) >= 1e-9) choice.centroid = normalize(mean);
  }
  return choice;
}

std::vector<NodeId> merge_and_prune(SearchTree& tree,
                                    const std::vector<NodeId>& new_children,
                                    const MergePolicy& policy,
                                    std::vector<Cluster>* clusters_out) {
  if (new_children.empty()) return {};
  std::optional<NodeId> parent;
  std::vector<std::pair<NodeId, Embedding>> siblings;
  siblings.reserve(new_children.size());
  for (NodeId id : new_children) {
    const SearchNode& n = tree.at(id);
    if (n.state != NodeState::Frontier) {
      throw IllegalStateError("merge_and_prune: node " + std::to_string(id) +
                              " is not in the frontier");
    }
    if (!n.embedding) {
      throw InvalidInputError("merge_and_prune: node " + std::to_string(id) +
                              " has no embedding");
    }
    if (!n.parent) {
      throw InvalidInputError("merge_and_prune: root is not a child");
    }
    if (parent && *parent != *n.parent) {
      throw InvalidInputError("merge_and_prune: children of different parents");
    }
    parent = *n.parent;
    siblings.emplace_back(id, *n.embedding);
  }

  std::vector<NodeId> survivors;
  for (const auto& members : cluster_siblings(siblings, policy.tau)) {
    std::vector<ClusterMember> cms;
    cms.reserve(members.size());
    for (NodeId id : members) {
      const SearchNode& n = tree.nodes[id];
      cms.push_back({id, n.phi, &*n.embedding});
    }
    const RepresentativeChoice choice = select_representative(cms, policy);
    for (NodeId id : members) {
      if (id != choice.id) mark_state(tree, id, NodeState::Merged);
    }
    if (choice.centroid) {
      set_embedding(tree, choice.id, *choice.centroid);
    }
    survivors.push_back(choice.id);
    if (clusters_out) clusters_out->push_back({members, choice.id});
  }
  std::sort(survivors.begin(), survivors.end());
  return survivors;
}

}  // namespace ssdp
