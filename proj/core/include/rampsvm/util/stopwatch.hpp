#pragma once

#include <chrono>

namespace rampsvm::util {

/// Effort clock for solver limits. In Deterministic mode (the default) time
/// is an arithmetic work counter fed by the solvers, so limits and any
/// time-derived output are reproducible run to run. Wall mode measures real
/// time and is opt-in for benchmarking.
class Stopwatch {
public:
  enum class Mode { Deterministic, Wall };

  // Work-unit scale: roughly flops, so units/kUnitsPerSecond tracks seconds
  // on desktop hardware within a small factor.
  static constexpr double kUnitsPerSecond = 1.2e9;

  explicit Stopwatch(Mode mode = Mode::Deterministic)
      : mode_(mode), wall_start_(std::chrono::steady_clock::now()) {}

  void add_work(double units) { units_ += units; }

  double seconds() const {
    if (mode_ == Mode::Wall) {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start_)
          .count();
    }
    return units_ / kUnitsPerSecond;
  }

  Mode mode() const { return mode_; }

private:
  Mode mode_;
  double units_ = 0.0;
  std::chrono::steady_clock::time_point wall_start_;
};

}  // namespace rampsvm::util
