#pragma once

#include <cstdint>
#include <string>

#include "ssdp/merge.hpp"

namespace ssdp {

enum class ClockMode { Simulated, Real };

const char* to_string(ClockMode m);
ClockMode clock_mode_from_string(const std::string& s);

// Engine hyperparameters. Defaults follow the reference configuration used
// throughout the experiments.
struct Config {
  double tau = 0.75;        // merge similarity threshold
  int b = 4;                // children generated per expansion
  int k = 4;                // frontier nodes selected per round
  double w = 0.7071067811865476;  // UCB exploration weight, 1/sqrt(2)
  double lambda_es = 0.8;   // early-stop factor on the running mean reward
  double lambda_ds = 0.8;   // deep-seek prune factor on the running mean reward
  int t_star = 5;           // solutions before the solution gate arms
  double t_max_s = 120.0;   // time budget, seconds (simulated or wall)
  int r_max = 20;           // rollout budget (selection rounds)
  double p = 0.5;           // fraction of selection slots used for exploitation
  MergeMode merge_mode = MergeMode::BestScore;
  std::uint64_t seed = 1;   // master seed for all derived randomness
  ClockMode clock_mode = ClockMode::Simulated;
  int max_depth = 32;       // rollout depth cap (greedy baselines)

  // Throws InvalidInputError when any field is out of range (non-positive
  // budgets, p outside [0, 1], negative thresholds, b/k < 1, ...).
  void validate() const;
};

std::string config_to_json(const Config& c);
Config config_from_json(const std::string& json_text);

}  // namespace ssdp
