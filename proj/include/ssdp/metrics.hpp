#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssdp/tree.hpp"

namespace ssdp {

// Running mean of every reward scored so far. Uses Kahan compensated
// summation so the accumulated mean is stable regardless of how many terms
// stream in (order still matters at the ulp level, but the engine feeds
// values in a deterministic order anyway).
struct RewardStats {
  std::int64_t count = 0;
  double sum = 0.0;

  void add(double phi) {
    const double y = phi - compensation_;
    const double t = sum + y;
    compensation_ = (t - sum) - y;
    sum = t;
    count += 1;
  }

  double mean() const { return count == 0 ? 0.0 : sum / count; }

 private:
  double compensation_ = 0.0;
};

struct SolutionRecord {
  NodeId node;
  double phi;
};

struct RunMetrics {
  std::int64_t nodes_generated = 0;
  std::int64_t nodes_explored = 0;
  std::int64_t nodes_merged = 0;
  int rollouts_completed = 0;
  double wall_time_s = 0.0;
  std::vector<SolutionRecord> solutions;
  std::optional<std::string> answer;  // absent when no terminal was found
  double answer_phi = 0.0;
};

}  // namespace ssdp
