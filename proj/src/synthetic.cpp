#include "ssdp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ssdp/hash.hpp"
#include "ssdp/merge.hpp"

namespace ssdp {

namespace {

// Uniform in [0, 1) from the top 53 bits.
double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

constexpr const char* kAnswerMarker = "The answer is";

const char* phrase_for(std::uint64_t h) {
  static const char* kPhrases[] = {"take branch", "follow route", "try move",
                                   "apply step", "pick option", "use path"};
  return kPhrases[h % 6];
}

// Moves taken along a path (index 0 is the root statement and carries none).
std::vector<int> path_moves(const std::vector<std::string>& path) {
  std::vector<int> moves;
  for (size_t i = 1; i < path.size(); ++i) {
    moves.push_back(parse_step_move(path[i]));
  }
  return moves;
}

std::string join_moves(const std::vector<int>& moves) {
  std::string out;
  for (size_t i = 0; i < moves.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(moves[i]);
  }
  return out;
}

}  // namespace

void PlantedPathProblem::validate() const {
  if (depth < 1) throw InvalidInputError("planted path: depth must be >= 1");
  if (arity < 1) throw InvalidInputError("planted path: arity must be >= 1");
  if (dup_rate < 1) throw InvalidInputError("planted path: dup_rate must be >= 1");
  if (sigma_dup <= 0.0 || sigma_dup > 1.0) {
    throw InvalidInputError("planted path: sigma_dup must be in (0, 1]");
  }
  if (sigma_distinct <= 0.0 || sigma_distinct >= 1.0) {
    throw InvalidInputError("planted path: sigma_distinct must be in (0, 1)");
  }
  if (reward_noise < 0.0 || reward_noise > 1.0) {
    throw InvalidInputError("planted path: reward_noise must be in [0, 1]");
  }
  if (embedding_dim < arity) {
    throw InvalidInputError("planted path: embedding_dim must be >= arity");
  }
  if (expand_cost_s < 0.0 || score_cost_s < 0.0 || embed_cost_s < 0.0) {
    throw InvalidInputError("planted path: costs must be >= 0");
  }
}

std::string PlantedPathProblem::statement() const {
  std::ostringstream out;
  out << "Instance " << hex_digits(splitmix64(seed), 8) << ": find the hidden "
      << depth << "-step move sequence (" << arity << " moves per step).";
  return out.str();
}

int PlantedPathProblem::on_path_move(int depth_index) const {
  return static_cast<int>(
      mix64(seed, 0x706c616e74ULL + static_cast<std::uint64_t>(depth_index)) %
      static_cast<std::uint64_t>(arity));
}

std::string PlantedPathProblem::planted_answer() const {
  std::vector<int> moves;
  for (int d = 0; d < depth; ++d) moves.push_back(on_path_move(d));
  return std::string(kAnswerMarker) + " " + join_moves(moves);
}

double perturbation_radius(double sigma_dup, double sigma_distinct) {
  const double max_angle =
      std::min(std::acos(sigma_dup), std::asin(sigma_distinct));
  return 0.9 * std::sin(max_angle / 2.0);
}

int parse_step_move(const std::string& text) {
  // Step texts look like "[d3|m1|s0a1b2c3d|v0] take branch 1".
  const size_t m = text.find("|m");
  const size_t bar = m == std::string::npos ? m : text.find('|', m + 2);
  if (text.empty() || text[0] != '[' || m == std::string::npos ||
      bar == std::string::npos) {
    throw InvalidInputError("not a synthetic step text: " + text);
  }
  int move = 0;
  try {
    move = std::stoi(text.substr(m + 2, bar - m - 2));
  } catch (const std::exception&) {
    throw InvalidInputError("not a synthetic step text: " + text);
  }
  if (move < 0) throw InvalidInputError("not a synthetic step text: " + text);
  return move;
}

std::vector<Candidate> synthetic_expand(const PlantedPathProblem& problem,
                                        const std::vector<std::string>& path,
                                        int b, std::uint64_t seed) {
  problem.validate();
  if (path.empty()) throw InvalidInputError("expand: path must include the root");
  if (b < 1) throw InvalidInputError("expand: b must be >= 1");
  const std::vector<int> moves = path_moves(path);
  const int pos = static_cast<int>(moves.size());  // move index being chosen
  if (pos >= problem.depth) {
    throw InvalidInputError("expand: node is already at terminal depth");
  }
  bool on_path = true;
  for (int i = 0; i < pos; ++i) {
    if (moves[i] != problem.on_path_move(i)) { on_path = false; break; }
  }

  std::string joined;
  for (const std::string& s : path) { joined += s; joined += '\x1f'; }
  const std::uint64_t h = mix64(mix64(problem.seed, fnv1a64(joined)), seed);

  // Distinct moves served in this batch: ceil(b / dup_rate), capped at arity.
  const int groups = std::min<int>(
      problem.arity, static_cast<int>((b + problem.dup_rate - 1) / problem.dup_rate));
  std::vector<int> chosen(problem.arity);
  for (int i = 0; i < problem.arity; ++i) chosen[i] = i;
  for (int i = problem.arity - 1; i > 0; --i) {
    const int j = static_cast<int>(
        mix64(h, 0xd1ceULL + static_cast<std::uint64_t>(i)) %
        static_cast<std::uint64_t>(i + 1));
    std::swap(chosen[i], chosen[j]);
  }
  chosen.resize(groups);
  const int correct = problem.on_path_move(pos);
  if (on_path &&
      std::find(chosen.begin(), chosen.end(), correct) == chosen.end()) {
    chosen.back() = correct;  // keep the planted solution reachable
  }

  const bool terminal = pos == problem.depth - 1;
  const std::string salt = hex_digits(h, 8);
  const double cost = problem.expand_cost_s / b;
  std::vector<Candidate> out;
  out.reserve(b);
  for (int j = 0; j < b; ++j) {
    const int move = chosen[j % groups];
    std::ostringstream text;
    text << "[d" << pos + 1 << "|m" << move << "|s" << salt << "|v" << j << "] ";
    if (terminal) {
      std::vector<int> full = moves;
      full.push_back(move);
      text << kAnswerMarker << " " << join_moves(full);
    } else {
      text << phrase_for(mix64(h, 0x7068ULL + j)) << " " << move;
    }
    out.push_back({text.str(), terminal, cost, move});
  }
  return out;
}

ScoreResult synthetic_score(const PlantedPathProblem& problem,
                            const std::vector<std::string>& path) {
  if (path.size() < 2) {
    throw InvalidInputError("score: path has no steps");
  }
  const std::vector<int> moves = path_moves(path);
  int prefix = 0;
  while (prefix < static_cast<int>(moves.size()) &&
         moves[prefix] == problem.on_path_move(prefix)) {
    prefix += 1;
  }
  const double f = static_cast<double>(prefix) / moves.size();
  std::string joined;
  for (const std::string& s : path) { joined += s; joined += '\x1f'; }
  const double u = to_unit(mix64(problem.seed, fnv1a64(joined)));
  const double phi =
      std::clamp(0.7 * f + 0.3 * u * problem.reward_noise, 0.0, 1.0);
  return {phi, problem.score_cost_s};
}

EmbedResult synthetic_embed(const PlantedPathProblem& problem,
                            const std::string& text) {
  const int move = parse_step_move(text);
  if (move >= problem.arity) {
    throw InvalidInputError("unknown step text (move out of range): " + text);
  }
  const double r =
      perturbation_radius(problem.sigma_dup, problem.sigma_distinct);
  Embedding v(problem.embedding_dim, 0.0);
  v[move] = 1.0;
  if (r > 0.0) {
    std::mt19937_64 rng(mix64(problem.seed, fnv1a64(text)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Embedding delta(problem.embedding_dim);
    double sq = 0.0;
    for (double& x : delta) { x = gauss(rng); sq += x * x; }
    const double norm = std::sqrt(sq);
    if (norm > 1e-12) {
      for (int i = 0; i < problem.embedding_dim; ++i) {
        v[i] += r * delta[i] / norm;
      }
    }
  }
  return {std::move(v), problem.embed_cost_s};
}

bool SyntheticGeneratorBackend::answers_match(const std::string& answer,
                                              const std::string& expected) const {
  const auto a = answer_tail(answer, kAnswerMarker);
  const auto e = answer_tail(expected, kAnswerMarker);
  return a && e && *a == *e;
}

BackendSet make_synthetic_backends(const PlantedPathProblem& problem) {
  BackendSet set;
  set.generator = std::make_shared<SyntheticGeneratorBackend>(problem);
  set.reward = std::make_shared<SyntheticRewardBackend>(problem);
  set.embedding = std::make_shared<SyntheticEmbeddingBackend>(problem);
  return set;
}

}  // namespace ssdp
