#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "reactive/types.hpp"

namespace reactive {

/// Raised when a statistic is requested over an empty sample set.
class StatisticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default window capacity: 0.9^22 < 0.1, so older samples would shift the
/// average by less than ten percent.
inline constexpr std::size_t kDefaultWindowCapacity = 22;
inline constexpr double kDefaultAverageDecay = 0.9;

/// Weighted average over `window` (most recent sample first), weights
/// decay^l for the l-th most recent sample.
double movingAverage(std::span<const double> window, double decay);

/// Wait time after discounting work the rank could still do locally.
double reducedWaitTime(double rawWait, std::size_t pendingTasks,
                       double taskCost, std::size_t receivedTasks,
                       double penaltyPerReceived);

/// Lower cut-off for wait samples: 0.95 min + 0.05 max.
double calibrationThreshold(std::span<const double> allWaits);

/// Bounded time series with geometric weighting of its samples.
class MovingAverage {
 public:
  explicit MovingAverage(double decay = kDefaultAverageDecay,
                         std::size_t capacity = kDefaultWindowCapacity);

  void push(double sample);
  [[nodiscard]] double value() const;
  [[nodiscard]] bool empty() const { return window_.empty(); }
  [[nodiscard]] std::size_t size() const { return window_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] double decay() const { return decay_; }
  /// Most recent first.
  [[nodiscard]] const std::deque<double>& window() const { return window_; }

 private:
  double decay_;
  std::size_t capacity_;
  std::deque<double> window_;
};

/// Everything a rank knows about its own recent behaviour.
class RankStatistics {
 public:
  RankStatistics(RankId self, double decay = kDefaultAverageDecay,
                 std::size_t capacity = kDefaultWindowCapacity);

  [[nodiscard]] RankId rank() const { return self_; }

  void recordWait(RankId peer, double seconds);
  void recordTaskCost(double seconds);

  /// Smoothed wait toward `peer`; 0 if nothing was recorded yet.
  [[nodiscard]] double waitToward(RankId peer) const;
  [[nodiscard]] const std::map<RankId, MovingAverage>& waits() const {
    return waitToward_;
  }
  [[nodiscard]] bool hasTaskCost() const { return !taskCost_.empty(); }
  /// Throws StatisticError before the first completion was recorded.
  [[nodiscard]] double taskCost() const { return taskCost_.value(); }

  std::size_t pendingTasks = 0;
  std::size_t receivedTasks = 0;
  /// Own tasks produced in the last measured step (N^tasks).
  std::size_t ownTasks = 0;

 private:
  RankId self_;
  double decay_;
  std::size_t capacity_;
  std::map<RankId, MovingAverage> waitToward_;
  MovingAverage taskCost_;
};

}  // namespace reactive
