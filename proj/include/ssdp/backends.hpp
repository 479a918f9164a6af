#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssdp/tree.hpp"

namespace ssdp {

// One generated continuation of a path. `cost_s` is the backend-declared
// share of the generation cost attributed to this candidate (simulated-clock
// accounting). `group` is the ground-truth semantic group within its
// expansion batch when the backend knows it (synthetic suite); real backends
// leave it empty.
struct Candidate {
  std::string text;
  bool terminal = false;
  double cost_s = 0.0;
  std::optional<int> group;
};

struct ScoreResult {
  double phi = 0.0;   // in [0, 1]
  double cost_s = 0.0;
};

struct EmbedResult {
  Embedding raw;      // un-normalized; callers normalize
  double cost_s = 0.0;
};

// Backend contracts. Implementations must be deterministic in their declared
// inputs (synthetic suite) and safe for concurrent invocation: the engine may
// overlap calls from one selection round across threads and applies results
// in a deterministic order afterwards.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  // Produces up to `b` continuations of `path` (root text first, then one
  // entry per step). Throws BackendError on unrecoverable failure.
  virtual std::vector<Candidate> expand(const std::vector<std::string>& path,
                                        int b, std::uint64_t seed) = 0;
  // Answer-equality predicate used for accuracy scoring.
  virtual bool answers_match(const std::string& answer,
                             const std::string& expected) const {
    return answer == expected;
  }
};

class RewardBackend {
 public:
  virtual ~RewardBackend() = default;
  virtual ScoreResult score(const std::vector<std::string>& path) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual EmbedResult embed(const std::string& text) = 0;
  virtual int dimension() const = 0;
};

struct BackendSet {
  std::shared_ptr<GeneratorBackend> generator;
  std::shared_ptr<RewardBackend> reward;
  std::shared_ptr<EmbeddingBackend> embedding;
};

// Text after the last occurrence of `marker`, trimmed of surrounding
// whitespace and trailing punctuation; empty optional when the marker is
// absent. Used to compare final answers that are embedded in step text.
std::optional<std::string> answer_tail(const std::string& text,
                                       const std::string& marker);

// Fixed-reward stand-in for suites without a reward model endpoint.
class ConstantRewardBackend : public RewardBackend {
 public:
  explicit ConstantRewardBackend(double phi = 0.5, double cost_s = 0.0)
      : phi_(phi), cost_s_(cost_s) {}
  ScoreResult score(const std::vector<std::string>&) override {
    return {phi_, cost_s_};
  }

 private:
  double phi_;
  double cost_s_;
};

// Deterministic hashed bag-of-words embedder: lowercased alphanumeric tokens
// are feature-hashed into `dim` buckets with +/-1 signs. Cosine similarity of
// the result is a real near-duplicate measure for text (no model weights).
class HashedBowEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit HashedBowEmbeddingBackend(int dim = 256, double cost_s = 0.0);
  EmbedResult embed(const std::string& text) override;
  int dimension() const override { return dim_; }

 private:
  int dim_;
  double cost_s_;
};

}  // namespace ssdp
