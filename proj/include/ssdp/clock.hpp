#pragma once

#include <chrono>

#include "ssdp/config.hpp"

namespace ssdp {

// Run clock. In simulated mode every applied backend call advances virtual
// time by its declared cost (total-compute semantics, independent of how
// calls overlapped); elapsed() is then fully deterministic. In real mode
// advance() is a no-op and elapsed() reads the steady clock.
class RunClock {
 public:
  explicit RunClock(ClockMode mode)
      : mode_(mode), start_(std::chrono::steady_clock::now()) {}

  void advance(double cost_s) {
    if (mode_ == ClockMode::Simulated) virtual_s_ += cost_s;
  }

  double elapsed_s() const {
    if (mode_ == ClockMode::Simulated) return virtual_s_;
    const auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double>(d).count();
  }

  ClockMode mode() const { return mode_; }

 private:
  ClockMode mode_;
  double virtual_s_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ssdp
