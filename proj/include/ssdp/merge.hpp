#pragma once

#include <vector>

#include "ssdp/tree.hpp"

namespace ssdp {

enum class MergeMode {
  BestScore,  // representative keeps its own embedding
  Centroid,   // representative's embedding replaced by the normalized mean
  Disabled,   // merging skipped entirely (engine-level)
};

const char* to_string(MergeMode m);
MergeMode merge_mode_from_string(const std::string& s);

struct MergePolicy {
  double tau = 0.75;  // cosine threshold; pairs with sim >= tau are merged
  MergeMode mode = MergeMode::BestScore;
};

// Members sorted ascending by id; clusters ordered by smallest member id.
struct Cluster {
  std::vector<NodeId> members;
  NodeId representative = 0;
};

// Returns v / ||v||_2. Throws DegenerateEmbeddingError when ||v|| is zero (or
// denormal-small), InvalidInputError when v is empty or has non-finite
// entries.
Embedding normalize(const Embedding& v);

// Cosine similarity of two same-dimension vectors, clamped to [-1, 1].
// Throws InvalidInputError on dimension mismatch or empty input.
double cosine_similarity(const Embedding& a, const Embedding& b);

// Partitions sibling embeddings into single-link connected components of the
// graph with an edge wherever cosine similarity >= tau. Components are
// ordered by their smallest member id, members ascending. tau > 1 yields all
// singletons (cosine of unit vectors never exceeds 1).
std::vector<std::vector<NodeId>> cluster_siblings(
    const std::vector<std::pair<NodeId, Embedding>>& siblings, double tau);

struct ClusterMember {
  NodeId id;
  double phi;
  const Embedding* embedding;  // required for MergeMode::Centroid
};

struct RepresentativeChoice {
  NodeId id;
  std::optional<Embedding> centroid;  // set only in Centroid mode
};

// Picks the representative of one cluster: the member with the highest phi,
// ties toward the lowest id. In Centroid mode also returns the normalized
// mean of the member embeddings for the caller to install on the
// representative (the representative's text and phi are kept; nothing is
// rescored). A centroid whose mean is degenerate (near-zero, only possible
// when tau <= 0 admits opposing embeddings into one cluster) is omitted and
// the representative keeps its own embedding.
// Throws InvalidInputError on an empty cluster or missing embeddings in
// Centroid mode.
RepresentativeChoice select_representative(
    const std::vector<ClusterMember>& members, const MergePolicy& policy);

// Clusters `new_children` (same-parent Frontier siblings with embeddings),
// transitions every non-representative member to Merged (payload released),
// installs centroid embeddings in Centroid mode, and returns the surviving
// ids ascending. Survivor count == cluster count. Also appends the formed
// clusters to `clusters_out` when non-null (for trace emission).
// Throws InvalidInputError (different parents, missing embedding),
// IllegalStateError (non-Frontier member), NotFoundError.
std::vector<NodeId> merge_and_prune(SearchTree& tree,
                                    const std::vector<NodeId>& new_children,
                                    const MergePolicy& policy,
                                    std::vector<Cluster>* clusters_out = nullptr);

}  // namespace ssdp
