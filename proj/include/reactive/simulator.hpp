#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reactive/trace.hpp"
#include "reactive/types.hpp"

namespace reactive {

struct NetworkModel {
  double latency = 1e-5;    // seconds
  double bandwidth = 1e10;  // bytes per second
};

struct ClusterConfig {
  int nRanks = 1;
  int coresPerRank = 1;
  /// Per-rank speed multipliers. Empty means "derive from speedJitter".
  std::vector<double> coreSpeed;
  /// Speeds drawn uniformly from [1-j, 1+j] when coreSpeed is empty.
  double speedJitter = 0.0;
  NetworkModel network;
  std::uint64_t seed = 1;

  /// Explicit speeds or the seeded draw.
  [[nodiscard]] std::vector<double> resolvedSpeeds() const;
};

enum class WorkloadKind { Regular, StaticAmr, DynamicAmr, Explicit };

struct WorkloadParams {
  WorkloadKind kind = WorkloadKind::Regular;
  int totalTasks = 0;                           // regular
  int minCount = 512;                           // static/dynamic AMR
  int maxCount = 729;                           // static/dynamic AMR
  std::vector<int> counts;                      // explicit, same every step
  std::vector<std::vector<int>> perStepCounts;  // explicit, one row per step
  double driftAmplitude = 0.0;                  // dynamic AMR, fraction of base
  int driftPeriod = 40;                         // dynamic AMR, steps
  int remeshPeriod = 0;                         // dynamic AMR, 0 disables
  double remeshOverhead = 0.0;                  // seconds added on remesh steps
  double taskCost = 0.01;
  double inputBytes = 0.0;
  double outputBytes = 0.0;
  double offloadableFraction = 1.0;
};

/// Fully expanded per-step, per-rank task counts.
struct Workload {
  std::vector<std::vector<int>> counts;  // [step-1][rank]
  std::vector<double> stepOverhead;      // [step-1], extra serial seconds
  double taskCost = 0.01;
  double inputBytes = 0.0;
  double outputBytes = 0.0;
  double offloadableFraction = 1.0;

  [[nodiscard]] int steps() const { return static_cast<int>(counts.size()); }
  /// Step numbers start at 1.
  [[nodiscard]] long long totalTasks(int step) const;
  /// Whether task `index` of a rank's step is offloadable.
  [[nodiscard]] bool offloadable(int index) const;
};

Workload generateWorkload(const WorkloadParams& params, int nRanks, int steps,
                          std::uint64_t seed);

struct Disturbance {
  enum class Kind { Delay, Slowdown };
  Kind kind = Kind::Delay;
  RankId rank = 0;
  int period = 10;          // delay: every `period` steps
  int offset = 0;           // delay: fires when step % period == offset
  double delay = 1.0;       // seconds of stall at step start
  int firstStep = 1;        // slowdown range, inclusive
  int lastStep = 1;
  double speedFactor = 1.0;

  [[nodiscard]] bool activeAt(int step) const;
};

enum class BalancingMode { Off, Ccp, Diffusion, CcpDiffusion };

std::string toString(BalancingMode mode);
std::optional<BalancingMode> parseBalancingMode(const std::string& text);

struct BalancingParams {
  BalancingMode mode = BalancingMode::Diffusion;
  double omegaAvg = 0.9;
  int window = 22;
  double omegaDiff = 1.0;
  double omegaReinf = 1.0;
  bool reinforce = false;
  /// Negative selects the default of 2 x cores.
  int starvationC = -1;
  bool urgentRecompute = false;
  /// Balancing after step k uses the statistics of step k - staleness + 1.
  int staleness = 1;
  bool eagerPickup = false;
  /// Negative selects the rank's own smoothed task time.
  double penaltyPerReceived = -1.0;
  double stepOverhead = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  int steps = 1;
  ClusterConfig cluster;
  WorkloadParams workload;
  std::vector<Disturbance> disturbances;
  BalancingParams balancing;
};

/// Deterministic time to move `bytes` across the network.
double transferTime(double bytes, const NetworkModel& network);

/// Time at which a message arriving at `arrival` becomes visible to its
/// destination: immediately if the destination has an idle core or
/// progression is eager, otherwise at its next task boundary.
double pickupTime(double arrival, bool destinationIdle, double nextBoundary,
                  bool eagerPickup);

class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the in-loop checks when a runtime invariant breaks.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct RunOptions {
  /// Verify runtime invariants at every event.
  bool checkInvariants = false;
};

EventLog runSimulation(const Scenario& scenario, const RunOptions& options = {});

}  // namespace reactive
