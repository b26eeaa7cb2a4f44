#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "reactive/balancer.hpp"
#include "reactive/types.hpp"

namespace reactive {

enum class Priority { High, Low };

enum class TaskState {
  Ready,
  Enqueued,
  Offloaded,
  ExecutingRemote,
  Returned,
  RecomputedLocally,
  Done
};

/// One unit of work. Offloadable tasks are compute-heavy with small
/// input/output payloads and may be executed on another rank.
struct TaskDescriptor {
  TaskId id = 0;
  RankId origin = 0;
  double cost = 0.0;  // seconds on a nominal core
  double inputBytes = 0.0;
  double outputBytes = 0.0;
  bool offloadable = true;
  Priority priority = Priority::Low;
  TaskState state = TaskState::Ready;
};

/// Any inconsistency in the offload lifecycle that indicates a bug.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Message {
  enum class Kind { TaskSend, TaskReturn };
  Kind kind = Kind::TaskSend;
  RankId from = 0;
  RankId to = 0;
  TaskDescriptor task;

  [[nodiscard]] double bytes() const {
    return kind == Kind::TaskSend ? task.inputBytes : task.outputBytes;
  }
};

struct SpawnDecision {
  /// Set when the task left the rank; the send must be delivered to `*target`.
  std::optional<RankId> target;
  std::optional<Message> send;

  [[nodiscard]] bool offloaded() const { return target.has_value(); }
};

/// What happened to a message when the engine picked it up.
struct Delivery {
  enum class Kind { Hosted, Returned, Wasted };
  Kind kind;
  TaskId task;
  RankId peer;
};

/// Result of an urgent recompute request.
struct Recompute {
  TaskDescriptor task;
  RankId victim;
  bool blacklisted;
};

/// Per-step counters reported to the trace.
struct EngineCounters {
  int spawned = 0;
  int executedOwn = 0;
  int executedHosted = 0;
  int hosted = 0;
  int returned = 0;
  int recomputes = 0;
  int wastedReturns = 0;
  int emergencies = 0;
  QuotaMap offloadedTo;
};

/// The task engine of one rank: spawn-time offload decisions, the two-level
/// ready queue, and bookkeeping of tasks that are away.
class RankEngine {
 public:
  RankEngine(RankId rank, int cores, int starvationC);

  [[nodiscard]] RankId rank() const { return rank_; }
  [[nodiscard]] int cores() const { return cores_; }
  [[nodiscard]] int starvationC() const { return starvationC_; }

  /// Installs the step's quota; live counters restart from it.
  void beginStep(const QuotaMap& quota);

  /// Offloads when the local queue holds more than C tasks, the task is
  /// offloadable, and some target still has live quota (picked round-robin).
  /// Otherwise the task is enqueued locally with low priority.
  SpawnDecision spawnTask(TaskDescriptor task);

  /// Highest priority ready task, FIFO within a priority level.
  std::optional<TaskDescriptor> executeNext();

  /// Own task (or a recompute copy) finished on a local core.
  void completeLocal(const TaskDescriptor& task);

  /// Hosted task finished; produces the send-back toward its origin.
  Message completeRemote(const TaskDescriptor& task);

  /// Materialises arrived messages.
  std::vector<Delivery> pollIncoming(const std::vector<Message>& arrived);

  /// Oldest offloaded task whose result is still missing and that is not
  /// being recomputed.
  [[nodiscard]] std::optional<TaskId> oldestOutstanding() const;
  [[nodiscard]] RankId victimOf(TaskId id) const;

  /// Runs the retained copy of `id` locally. Records an emergency against
  /// the victim unless the mask from an earlier emergency is still up.
  Recompute urgentRecompute(TaskId id);

  /// Progress is blocked on `id` and recomputes are disabled: the victim
  /// gets an emergency, at most once per step.
  bool noteBlockedOn(TaskId id);

  [[nodiscard]] std::size_t readyCount() const { return high_.size() + low_.size(); }
  [[nodiscard]] std::size_t highCount() const { return high_.size(); }
  [[nodiscard]] std::size_t lowCount() const { return low_.size(); }
  [[nodiscard]] int ownOutstanding() const { return ownOutstanding_; }
  [[nodiscard]] int hostedOutstanding() const { return hostedOutstanding_; }
  /// Offloaded tasks whose result has not come back, recomputed or not.
  [[nodiscard]] std::size_t awaitingCount() const { return awaiting_.size(); }
  [[nodiscard]] bool hasRetainedCopy(TaskId id) const { return awaiting_.count(id) != 0; }
  [[nodiscard]] std::optional<RankId> emergencyMask() const { return mask_; }

  [[nodiscard]] const OffloadQuota& quota() const { return quota_; }
  [[nodiscard]] const EngineCounters& counters() const { return counters_; }
  [[nodiscard]] Blacklist& blacklist() { return blacklist_; }
  [[nodiscard]] const Blacklist& blacklist() const { return blacklist_; }

  /// Turns the emergency mask on for urgent-recompute runs.
  void setMaskEmergencies(bool on) { maskEmergencies_ = on; }

 private:
  struct Away {
    TaskDescriptor copy;
    RankId victim;
    bool recomputed = false;
  };

  std::optional<RankId> pickTarget();
  bool recordEmergency(RankId victim);
  void releaseMaskIfDone();

  RankId rank_;
  int cores_;
  int starvationC_;
  bool maskEmergencies_ = true;

  std::deque<TaskDescriptor> high_;
  std::deque<TaskDescriptor> low_;
  OffloadQuota quota_;
  RankId cursor_ = 0;
  std::map<TaskId, Away> awaiting_;
  int ownOutstanding_ = 0;
  int hostedOutstanding_ = 0;
  std::optional<RankId> mask_;
  std::set<RankId> emergencyThisStep_;
  Blacklist blacklist_;
  EngineCounters counters_;
};

}  // namespace reactive
