#include "reactive/stats.hpp"

#include <algorithm>
#include <cmath>

namespace reactive {

double movingAverage(std::span<const double> window, double decay) {
  if (window.empty()) {
    throw StatisticError("moving average over an empty window");
  }
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("moving average decay must lie in (0,1]");
  }
  double weighted = 0.0;
  double norm = 0.0;
  double weight = 1.0;
  for (double sample : window) {
    weighted += weight * sample;
    norm += weight;
    weight *= decay;
  }
  return weighted / norm;
}

double reducedWaitTime(double rawWait, std::size_t pendingTasks,
                       double taskCost, std::size_t receivedTasks,
                       double penaltyPerReceived) {
  const double reduced = rawWait - static_cast<double>(pendingTasks) * taskCost -
                         static_cast<double>(receivedTasks) * penaltyPerReceived;
  return std::max(0.0, reduced);
}

double calibrationThreshold(std::span<const double> allWaits) {
  if (allWaits.empty()) {
    throw StatisticError("calibration threshold over no wait samples");
  }
  const auto [lo, hi] = std::minmax_element(allWaits.begin(), allWaits.end());
  return 0.95 * *lo + 0.05 * *hi;
}

MovingAverage::MovingAverage(double decay, std::size_t capacity)
    : decay_(decay), capacity_(capacity) {
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw std::invalid_argument("moving average decay must lie in (0,1]");
  }
  if (capacity == 0) {
    throw std::invalid_argument("moving average capacity must be positive");
  }
}

void MovingAverage::push(double sample) {
  window_.push_front(sample);
  if (window_.size() > capacity_) window_.pop_back();
}

double MovingAverage::value() const {
  if (window_.empty()) {
    throw StatisticError("moving average has no samples");
  }
  double weighted = 0.0;
  double norm = 0.0;
  double weight = 1.0;
  for (double sample : window_) {
    weighted += weight * sample;
    norm += weight;
    weight *= decay_;
  }
  return weighted / norm;
}

RankStatistics::RankStatistics(RankId self, double decay, std::size_t capacity)
    : self_(self), decay_(decay), capacity_(capacity), taskCost_(decay, capacity) {}

void RankStatistics::recordWait(RankId peer, double seconds) {
  if (peer == self_) return;
  auto it = waitToward_.find(peer);
  if (it == waitToward_.end()) {
    it = waitToward_.emplace(peer, MovingAverage(decay_, capacity_)).first;
  }
  it->second.push(seconds);
}

void RankStatistics::recordTaskCost(double seconds) { taskCost_.push(seconds); }

double RankStatistics::waitToward(RankId peer) const {
  auto it = waitToward_.find(peer);
  if (it == waitToward_.end() || it->second.empty()) return 0.0;
  return it->second.value();
}

}  // namespace reactive
