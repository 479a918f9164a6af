#pragma once

#include <cstdint>

#include "ssdp/backends.hpp"

namespace ssdp {

// Deterministic benchmark family with one planted root-to-leaf move sequence.
//
// State space: a node at depth d (root = 0) is a sequence of d moves, each in
// [0, arity). Exactly one move per depth is "on path" (derived from `seed`);
// the unique fully-on-path sequence of length `depth` is the planted
// solution. Every expansion at depth `depth - 1` produces terminal
// candidates whose text ends with "The answer is <move sequence>", so a
// terminal's correctness is decidable exactly.
//
// Expansion: a request for b candidates is served by ceil(b / dup_rate)
// distinct moves (capped at arity), each emitted as several textual
// paraphrases; the move index is the ground-truth semantic group recorded on
// each candidate. An on-path parent is always offered the on-path move at
// least once, so the planted solution stays reachable.
//
// Reward: phi = clamp(0.7 * f + 0.3 * u * reward_noise, 0, 1) where f is the
// fraction of the path that forms an on-path prefix and u is per-path noise
// in [0, 1] derived from `seed`.
//
// Embeddings: each move g maps to the unit basis axis e_g of R^dim; a
// paraphrase embeds as e_g + delta with a text-keyed perturbation of norm
// r <= sin(theta). Because the angle between e_g + delta and e_g is at most
// asin(r) (tangent bound on a radius-r sphere around a unit vector):
//   - same-group pairs differ by at most 2*asin(r), so their cosine is at
//     least cos(2 asin r)  >= sigma_dup   when 2 asin r <= acos(sigma_dup);
//   - cross-group pairs (orthogonal axes) differ by at least
//     pi/2 - 2*asin(r), so their cosine is at most sin(2 asin r)
//     <= sigma_distinct                   when 2 asin r <= asin(sigma_distinct).
// Hence r = margin * sin(min(acos(sigma_dup), asin(sigma_distinct)) / 2) with
// margin = 0.9 guarantees both separation bounds deterministically.
struct PlantedPathProblem {
  std::uint64_t seed = 0;
  int depth = 6;
  int arity = 3;          // distinct semantic moves per state
  int dup_rate = 2;       // paraphrases per distinct move in one expansion
  double sigma_dup = 0.95;       // intra-group cosine floor
  double sigma_distinct = 0.30;  // inter-group cosine ceiling
  double reward_noise = 0.05;    // scale of the reward noise term
  int embedding_dim = 384;
  // Declared backend costs (simulated-clock seconds).
  double expand_cost_s = 1.0;
  double score_cost_s = 0.25;
  double embed_cost_s = 0.05;

  void validate() const;  // InvalidInputError on out-of-range fields

  std::string statement() const;        // root node text
  int on_path_move(int depth_index) const;  // the correct move at a depth
  std::string planted_answer() const;   // "The answer is d0-d1-..." text
};

// The three backends for one problem instance. All are pure functions of
// their inputs plus the problem definition.
std::vector<Candidate> synthetic_expand(const PlantedPathProblem& problem,
                                        const std::vector<std::string>& path,
                                        int b, std::uint64_t seed);
ScoreResult synthetic_score(const PlantedPathProblem& problem,
                            const std::vector<std::string>& path);
EmbedResult synthetic_embed(const PlantedPathProblem& problem,
                            const std::string& text);

// Perturbation radius derived from the separation parameters (see above).
double perturbation_radius(double sigma_dup, double sigma_distinct);

// Move index encoded in a step text. Throws InvalidInputError when the text
// was not produced by synthetic_expand.
int parse_step_move(const std::string& text);

class SyntheticGeneratorBackend : public GeneratorBackend {
 public:
  explicit SyntheticGeneratorBackend(PlantedPathProblem problem)
      : problem_(problem) {
    problem_.validate();
  }
  std::vector<Candidate> expand(const std::vector<std::string>& path, int b,
                                std::uint64_t seed) override {
    return synthetic_expand(problem_, path, b, seed);
  }
  // Terminal texts carry a step prefix before the answer marker, so equality
  // is decided on the text after "The answer is".
  bool answers_match(const std::string& answer,
                     const std::string& expected) const override;
  const PlantedPathProblem& problem() const { return problem_; }

 private:
  PlantedPathProblem problem_;
};

class SyntheticRewardBackend : public RewardBackend {
 public:
  explicit SyntheticRewardBackend(PlantedPathProblem problem)
      : problem_(problem) {}
  ScoreResult score(const std::vector<std::string>& path) override {
    return synthetic_score(problem_, path);
  }

 private:
  PlantedPathProblem problem_;
};

class SyntheticEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit SyntheticEmbeddingBackend(PlantedPathProblem problem)
      : problem_(problem) {}
  EmbedResult embed(const std::string& text) override {
    return synthetic_embed(problem_, text);
  }
  int dimension() const override { return problem_.embedding_dim; }

 private:
  PlantedPathProblem problem_;
};

BackendSet make_synthetic_backends(const PlantedPathProblem& problem);

}  // namespace ssdp
