#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "reactive/simulator.hpp"

namespace reactive {

namespace {

// Uniform in [0,1) from the top 53 bits; keeps draws identical across
// standard library implementations.
double unitDraw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<int> staticAmrCounts(const WorkloadParams& p, int nRanks, std::mt19937_64& rng) {
  std::vector<int> values(static_cast<std::size_t>(nRanks), p.minCount);
  if (nRanks == 1) return values;
  // Roughly the lightest two sevenths stay unrefined; one rank carries the
  // full refinement.
  const int light = std::max(1, static_cast<int>(std::lround(nRanks * 8.0 / 28.0)));
  values.back() = p.maxCount;
  for (int r = light; r < nRanks - 1; ++r) {
    values[r] = p.minCount + static_cast<int>(unitDraw(rng) * (p.maxCount - p.minCount));
  }
  // Fisher-Yates with our own draw for portability.
  for (int i = nRanks - 1; i > 0; --i) {
    const int j = static_cast<int>(unitDraw(rng) * (i + 1));
    std::swap(values[i], values[j]);
  }
  return values;
}

}  // namespace

std::vector<double> ClusterConfig::resolvedSpeeds() const {
  if (!coreSpeed.empty()) return coreSpeed;
  std::vector<double> speeds(static_cast<std::size_t>(nRanks), 1.0);
  if (speedJitter > 0.0) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (double& s : speeds) s = 1.0 - speedJitter + 2.0 * speedJitter * unitDraw(rng);
  }
  return speeds;
}

long long Workload::totalTasks(int step) const {
  const auto& row = counts.at(static_cast<std::size_t>(step - 1));
  return std::accumulate(row.begin(), row.end(), 0LL);
}

bool Workload::offloadable(int index) const {
  if (offloadableFraction >= 1.0) return true;
  if (offloadableFraction <= 0.0) return false;
  return std::floor((index + 1) * offloadableFraction) > std::floor(index * offloadableFraction);
}

bool Disturbance::activeAt(int step) const {
  if (kind == Kind::Delay) return period > 0 && step % period == offset;
  return step >= firstStep && step <= lastStep;
}

Workload generateWorkload(const WorkloadParams& params, int nRanks, int steps,
                          std::uint64_t seed) {
  Workload w;
  w.taskCost = params.taskCost;
  w.inputBytes = params.inputBytes;
  w.outputBytes = params.outputBytes;
  w.offloadableFraction = params.offloadableFraction;
  w.stepOverhead.assign(static_cast<std::size_t>(steps), 0.0);
  std::mt19937_64 rng(seed);

  std::vector<int> base;
  switch (params.kind) {
    case WorkloadKind::Regular: {
      base.assign(static_cast<std::size_t>(nRanks), params.totalTasks / nRanks);
      for (int r = 0; r < params.totalTasks % nRanks; ++r) ++base[r];
      break;
    }
    case WorkloadKind::StaticAmr:
    case WorkloadKind::DynamicAmr:
      base = staticAmrCounts(params, nRanks, rng);
      break;
    case WorkloadKind::Explicit:
      if (!params.perStepCounts.empty()) {
        w.counts = params.perStepCounts;
        w.counts.resize(static_cast<std::size_t>(steps));
        return w;
      }
      base = params.counts;
      break;
  }

  if (params.kind != WorkloadKind::DynamicAmr) {
    w.counts.assign(static_cast<std::size_t>(steps), base);
    return w;
  }

  std::vector<double> phase(static_cast<std::size_t>(nRanks));
  for (double& p : phase) p = unitDraw(rng);
  w.counts.reserve(static_cast<std::size_t>(steps));
  for (int step = 1; step <= steps; ++step) {
    if (params.remeshPeriod > 0 && step > 1 && step % params.remeshPeriod == 0) {
      // A re-mesh shifts the refined region: new phases, extra serial cost.
      for (double& p : phase) p = unitDraw(rng);
      w.stepOverhead[step - 1] = params.remeshOverhead;
    }
    std::vector<int> row(static_cast<std::size_t>(nRanks));
    for (int r = 0; r < nRanks; ++r) {
      const double angle =
          2.0 * std::numbers::pi * (static_cast<double>(step) / params.driftPeriod + phase[r]);
      const double scaled = base[r] * (1.0 + params.driftAmplitude * std::sin(angle));
      row[r] = std::max(0, static_cast<int>(std::lround(scaled)));
    }
    w.counts.push_back(std::move(row));
  }
  return w;
}

}  // namespace reactive
