#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "reactive/types.hpp"

namespace reactive {

/// Directed "i waits on j" graph. Zero-weight edges are never stored.
class WaitGraph {
 public:
  explicit WaitGraph(int nRanks = 0) : nRanks_(nRanks) {}

  /// Ignores self-edges and non-positive weights; repeated edges accumulate.
  void addWait(RankId from, RankId to, double seconds);

  [[nodiscard]] int ranks() const { return nRanks_; }
  [[nodiscard]] const std::map<std::pair<RankId, RankId>, double>& edges() const {
    return edges_;
  }
  [[nodiscard]] double inbound(RankId rank) const;
  [[nodiscard]] double outbound(RankId rank) const;
  [[nodiscard]] double total() const;

 private:
  int nRanks_;
  std::map<std::pair<RankId, RankId>, double> edges_;
};

/// Per-step offload allowance of one rank. `live` counts down as tasks leave.
struct OffloadQuota {
  QuotaMap target;
  QuotaMap live;

  void reset(const QuotaMap& next);
  [[nodiscard]] int usedToward(RankId rank) const;
  [[nodiscard]] int totalUsed() const;
  /// Check-and-decrement. Returns false if nothing is left toward `rank`.
  bool tryTake(RankId rank);
};

/// Weighted set of victims that returned results too late.
class Blacklist {
 public:
  static constexpr double kThreshold = 0.5;
  static constexpr double kDecay = 0.9;

  void recordEmergency(RankId victim);
  /// One rebalancing round: every weight shrinks by ten percent, entries
  /// falling under the threshold disappear.
  void decay();

  [[nodiscard]] bool contains(RankId rank) const { return weights_.count(rank) != 0; }
  [[nodiscard]] double weight(RankId rank) const;
  [[nodiscard]] const std::map<RankId, double>& weights() const { return weights_; }
  [[nodiscard]] bool empty() const { return weights_.empty(); }

 private:
  std::map<RankId, double> weights_;
};

/// Relaxation state of one rank's diffusion.
struct DiffusionState {
  static constexpr double kMinOmega = 0.1;
  static constexpr double kMaxOmega = 1.0;

  double omegaDiff = 1.0;
  double omegaReinf = 1.0;
  /// N^opt of the previous round and the quota it was compared against.
  QuotaMap prevOptimal;
  QuotaMap prevOffload;
  bool hasHistory = false;
};

/// Rank that is waited on the most; lowest id wins ties.
RankId criticalRank(const WaitGraph& graph);

/// Non-blacklisted rank other than `self` that waits the most in total.
std::optional<RankId> optimalVictim(const WaitGraph& graph,
                                    const std::set<RankId>& blacklist,
                                    RankId self);

/// Inputs to one rank's reactive update.
struct ReactiveInputs {
  RankId self = 0;
  /// Smoothed per-task time of `self`; unset until a task completed.
  std::optional<double> taskCost;
  /// Tasks `self` sent to each target in the newest step of the statistics.
  QuotaMap current;
  /// Moving average of the same counts over the statistics window. The
  /// smoothed waits were produced by this distribution, so the difference to
  /// `current` is work that has moved since. Absent targets default to
  /// `current`.
  std::map<RankId, double> smoothed;
  /// Stolen tasks hosted per rank: newest sample and moving average, both
  /// from the statistics snapshot. When the victim is listed, its change
  /// replaces `self`'s own sends as the work that reached it since.
  std::map<RankId, double> hostedLatest;
  std::map<RankId, double> hostedSmoothed;
  /// Ranks whose stolen tasks `self` hosted in the latest step. They are
  /// not chosen as victims.
  std::set<RankId> hostedFrom;
  /// Upper bound on the total offloaded tasks (own task count).
  int maxTasks = std::numeric_limits<int>::max();
};

/// Backward-looking optimum of one rank. Only the critical rank acts: it
/// moves half of the optimal victim's wait, expressed in its own tasks, to
/// that victim. The wait is first shifted by the tasks that moved since the
/// smoothed statistics were taken, so the update may also shrink a quota.
/// Blacklisted partners drop to zero; all other entries carry over from
/// `optimal`.
QuotaMap reactiveStep(const WaitGraph& graph, const ReactiveInputs& in,
                      const std::set<RankId>& blacklist, QuotaMap optimal);

/// Relaxed blend of the optimum into the current quota.
QuotaMap diffuse(double omegaDiff, const QuotaMap& optimal, const QuotaMap& current);

/// Grows omega while consecutive updates keep dragging, shrinks it
/// otherwise. Returns the new omega and stores it in `state`.
double reinforce(DiffusionState& state, const QuotaMap& optimalNow,
                 const QuotaMap& offloadNow);

/// Pure ratio form of the reinforcement rule.
double reinforceOmega(double omegaDiff, double omegaReinf, double numerator,
                      double denominator);

/// Sum over targets of |a[j] - b[j]|.
double quotaDistance(const QuotaMap& a, const QuotaMap& b);

/// Half away from zero.
int roundHalfAway(double value);

/// Reduced chains-on-chains partitioning under uniform task cost. Returns,
/// per source rank, how many tasks go to which target.
std::vector<QuotaMap> ccpPartition(const std::vector<int>& taskCounts, int nRanks);

/// Resulting load per rank after applying a partition plan.
std::vector<int> applyPartition(const std::vector<int>& taskCounts,
                                const std::vector<QuotaMap>& plan);

}  // namespace reactive
