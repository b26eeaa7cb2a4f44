#include "reactive/simulator.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <queue>
#include <sstream>
#include <tuple>

#include "reactive/balancer.hpp"
#include "reactive/runtime.hpp"
#include "reactive/scenario.hpp"
#include "reactive/stats.hpp"

namespace reactive {

std::string toString(BalancingMode mode) {
  switch (mode) {
    case BalancingMode::Off: return "off";
    case BalancingMode::Ccp: return "ccp";
    case BalancingMode::Diffusion: return "diffusion";
    case BalancingMode::CcpDiffusion: return "ccp+diffusion";
  }
  return "off";
}

std::optional<BalancingMode> parseBalancingMode(const std::string& text) {
  if (text == "off") return BalancingMode::Off;
  if (text == "ccp") return BalancingMode::Ccp;
  if (text == "diffusion") return BalancingMode::Diffusion;
  if (text == "ccp+diffusion") return BalancingMode::CcpDiffusion;
  return std::nullopt;
}

double transferTime(double bytes, const NetworkModel& network) {
  return network.latency + bytes / network.bandwidth;
}

double pickupTime(double arrival, bool destinationIdle, double nextBoundary,
                  bool eagerPickup) {
  if (destinationIdle || eagerPickup) return arrival;
  return std::max(arrival, nextBoundary);
}

namespace {

enum EventKind { kArrive = 0, kTaskEnd = 1, kStallEnd = 2, kBlockCheck = 3 };

struct Event {
  double time = 0.0;
  int kind = kArrive;
  RankId rank = 0;
  TaskId task = 0;
  std::uint64_t seq = 0;
  int core = -1;
  std::optional<Message> message;
};

struct LaterFirst {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.kind, a.rank, a.task, a.seq) >
           std::tie(b.time, b.kind, b.rank, b.task, b.seq);
  }
};

enum class ExecKind { Own, Hosted, Recompute };

struct Exec {
  double start;
  double end;
  ExecKind kind;
};

struct Core {
  bool busy = false;
  bool recompute = false;
  double start = 0.0;
  TaskDescriptor task;
};

/// Per-step scratch state of one rank.
struct RankStep {
  std::vector<Core> cores;
  bool stalled = false;
  double stallEnd = 0.0;
  double speed = 1.0;
  double finish = 0.0;
  std::vector<Message> inbox;
  std::vector<Exec> execs;
  std::map<RankId, double> blocked;
  std::optional<double> blockStart;
  RankId blockVictim = -1;
  bool checkQueued = false;
};

struct Snapshot {
  std::vector<RankStatistics> stats;
  std::vector<std::map<RankId, double>> sentAvg;
  std::vector<std::map<RankId, double>> sentLatest;
  std::map<RankId, double> hostedLatest;
  std::map<RankId, double> hostedAvg;
};

class Simulation {
 public:
  Simulation(const Scenario& scenario, const RunOptions& options)
      : sc_(scenario),
        opt_(options),
        n_(scenario.cluster.nRanks),
        workload_(generateWorkload(scenario.workload, scenario.cluster.nRanks, scenario.steps,
                                   scenario.cluster.seed)),
        speeds_(scenario.cluster.resolvedSpeeds()) {
    const int cores = sc_.cluster.coresPerRank;
    const int c = sc_.balancing.starvationC < 0 ? 2 * cores : sc_.balancing.starvationC;
    for (RankId r = 0; r < n_; ++r) {
      engines_.emplace_back(r, cores, c);
      engines_.back().setMaskEmergencies(sc_.balancing.urgentRecompute);
      stats_.emplace_back(r, sc_.balancing.omegaAvg, static_cast<std::size_t>(sc_.balancing.window));
      DiffusionState state;
      state.omegaDiff = sc_.balancing.omegaDiff;
      state.omegaReinf = sc_.balancing.omegaReinf;
      diffusion_.push_back(state);
    }
    quota_.assign(static_cast<std::size_t>(n_), {});
    optimal_.assign(static_cast<std::size_t>(n_), {});
    sent_.resize(static_cast<std::size_t>(n_));
    hosted_.assign(static_cast<std::size_t>(n_),
                   MovingAverage(sc_.balancing.omegaAvg,
                                 static_cast<std::size_t>(sc_.balancing.window)));
  }

  EventLog run() {
    EventLog log;
    log.scenario = sc_.name;
    log.mode = toString(sc_.balancing.mode);
    log.nRanks = n_;
    const BalancingMode mode = sc_.balancing.mode;
    if (mode == BalancingMode::Ccp || mode == BalancingMode::CcpDiffusion) {
      quota_ = ccpPartition(workload_.counts.at(0), n_);
      optimal_ = quota_;
    }
    for (int step = 1; step <= sc_.steps; ++step) {
      StepRecord record = runStep(step);
      balance(step);
      log.steps.push_back(std::move(record));
    }
    return log;
  }

 private:
  // ---- event plumbing -----------------------------------------------------

  void push(Event e) {
    e.seq = seq_++;
    queue_.push(std::move(e));
  }

  [[nodiscard]] int idleCore(const RankStep& rs) const {
    for (std::size_t i = 0; i < rs.cores.size(); ++i) {
      if (!rs.cores[i].busy) return static_cast<int>(i);
    }
    return -1;
  }

  void violation(const std::string& what, RankId rank, double t) const {
    std::ostringstream os;
    os << what << " (rank " << rank << ", step " << step_ << ", t=" << t << ")";
    throw InvariantViolation(os.str());
  }

  void finalize(TaskId id, RankId rank, double t) {
    if (!opt_.checkInvariants) return;
    int& slot = finalized_.at(static_cast<std::size_t>(id - firstId_));
    if (++slot > 1) violation("task " + std::to_string(id) + " finalized twice", rank, t);
  }

  void startTask(RankId r, int core, const TaskDescriptor& task, bool recompute, double t) {
    RankStep& rs = ranks_[r];
    Core& slot = rs.cores[static_cast<std::size_t>(core)];
    slot.busy = true;
    slot.recompute = recompute;
    slot.start = t;
    slot.task = task;
    Event e;
    e.time = t + task.cost / rs.speed;
    e.kind = kTaskEnd;
    e.rank = r;
    e.task = task.id;
    e.core = core;
    push(std::move(e));
  }

  void dispatch(RankId r, double t) {
    RankStep& rs = ranks_[r];
    if (rs.stalled) return;
    RankEngine& engine = engines_[r];
    for (int core = idleCore(rs); core >= 0; core = idleCore(rs)) {
      std::optional<TaskDescriptor> task = engine.executeNext();
      if (!task) break;
      if (opt_.checkInvariants && task->priority == Priority::Low && engine.highCount() > 0) {
        violation("low priority task chosen while hosted tasks are ready", r, t);
      }
      startTask(r, core, *task, false, t);
    }
  }

  void queueCheck(RankId r, double t) {
    RankStep& rs = ranks_[r];
    if (rs.checkQueued) return;
    rs.checkQueued = true;
    Event e;
    e.time = t;
    e.kind = kBlockCheck;
    e.rank = r;
    push(std::move(e));
  }

  void deliver(RankId r, std::vector<Message> messages, double t) {
    RankStep& rs = ranks_[r];
    for (const Delivery& d : engines_[r].pollIncoming(messages)) {
      if (d.kind == Delivery::Kind::Returned) finalize(d.task, r, t);
      if (d.kind != Delivery::Kind::Hosted) rs.finish = std::max(rs.finish, t);
    }
    dispatch(r, t);
    queueCheck(r, t);
  }

  void resume(RankId r, double t) {
    RankStep& rs = ranks_[r];
    if (!rs.inbox.empty()) {
      std::vector<Message> messages;
      messages.swap(rs.inbox);
      deliver(r, std::move(messages), t);
    } else {
      dispatch(r, t);
      queueCheck(r, t);
    }
  }

  void onArrive(const Event& e) {
    const Message& m = *e.message;
    RankStep& rs = ranks_[m.to];
    const bool idle = !rs.stalled && idleCore(rs) >= 0;
    if (idle || sc_.balancing.eagerPickup) {
      deliver(m.to, {m}, e.time);
    } else {
      rs.inbox.push_back(m);
    }
  }

  void onTaskEnd(const Event& e) {
    const RankId r = e.rank;
    RankStep& rs = ranks_[r];
    Core& slot = rs.cores[static_cast<std::size_t>(e.core)];
    const TaskDescriptor task = slot.task;
    const bool recompute = slot.recompute;
    slot.busy = false;
    rs.finish = std::max(rs.finish, e.time);
    if (recompute) {
      rs.execs.push_back({slot.start, e.time, ExecKind::Recompute});
      engines_[r].completeLocal(task);
      finalize(task.id, r, e.time);
    } else if (task.origin == r) {
      rs.execs.push_back({slot.start, e.time, ExecKind::Own});
      engines_[r].completeLocal(task);
      finalize(task.id, r, e.time);
    } else {
      rs.execs.push_back({slot.start, e.time, ExecKind::Hosted});
      Message back = engines_[r].completeRemote(task);
      Event a;
      a.time = e.time + transferTime(back.bytes(), sc_.cluster.network);
      a.kind = kArrive;
      a.rank = back.to;
      a.task = task.id;
      a.message = std::move(back);
      push(std::move(a));
    }
    resume(r, e.time);
  }

  void onStallEnd(const Event& e) {
    RankStep& rs = ranks_[e.rank];
    rs.stalled = false;
    rs.finish = std::max(rs.finish, e.time);
    resume(e.rank, e.time);
  }

  [[nodiscard]] bool runningNonRecompute(const RankStep& rs) const {
    return std::any_of(rs.cores.begin(), rs.cores.end(),
                       [](const Core& c) { return c.busy && !c.recompute; });
  }

  [[nodiscard]] std::optional<TaskId> blockedOn(RankId r) const {
    const RankStep& rs = ranks_[r];
    const RankEngine& engine = engines_[r];
    if (rs.stalled || engine.readyCount() > 0 || idleCore(rs) < 0 || runningNonRecompute(rs)) {
      return std::nullopt;
    }
    return engine.oldestOutstanding();
  }

  void closeBlock(RankStep& rs, double t) {
    if (!rs.blockStart) return;
    rs.blocked[rs.blockVictim] += t - *rs.blockStart;
    rs.blockStart.reset();
  }

  void onBlockCheck(const Event& e) {
    const RankId r = e.rank;
    RankStep& rs = ranks_[r];
    RankEngine& engine = engines_[r];
    rs.checkQueued = false;
    if (sc_.balancing.urgentRecompute) {
      while (auto id = blockedOn(r)) {
        Recompute rc = engine.urgentRecompute(*id);
        startTask(r, idleCore(rs), rc.task, true, e.time);
      }
      return;
    }
    const std::optional<TaskId> id = blockedOn(r);
    if (!id) {
      closeBlock(rs, e.time);
      return;
    }
    const RankId victim = engine.victimOf(*id);
    if (rs.blockStart && rs.blockVictim != victim) closeBlock(rs, e.time);
    if (!rs.blockStart) {
      rs.blockStart = e.time;
      rs.blockVictim = victim;
      engine.noteBlockedOn(*id);
    }
  }

  void checkWorkConservation(RankId r, double t) const {
    const RankStep& rs = ranks_[r];
    if (!rs.stalled && engines_[r].readyCount() > 0 && idleCore(rs) >= 0) {
      violation("idle core while tasks are ready", r, t);
    }
  }

  // ---- one bulk-synchronous step -------------------------------------------

  [[nodiscard]] double speedAt(RankId r, int step) const {
    double s = speeds_[r];
    for (const Disturbance& d : sc_.disturbances) {
      if (d.kind == Disturbance::Kind::Slowdown && d.rank == r && d.activeAt(step)) {
        s *= d.speedFactor;
      }
    }
    return s;
  }

  void spawnAll(RankId r, int count, double t) {
    RankEngine& engine = engines_[r];
    for (int i = 0; i < count; ++i) {
      TaskDescriptor task;
      task.id = nextId_++;
      task.origin = r;
      task.cost = workload_.taskCost;
      task.inputBytes = workload_.inputBytes;
      task.outputBytes = workload_.outputBytes;
      task.offloadable = workload_.offloadable(i);
      const std::size_t readyBefore = engine.readyCount();
      SpawnDecision decision = engine.spawnTask(task);
      if (!decision.offloaded()) continue;
      const Message& send = *decision.send;
      if (opt_.checkInvariants) {
        if (readyBefore <= static_cast<std::size_t>(engine.starvationC())) {
          violation("offload while the ready queue is at or below C", r, t);
        }
        if (send.from != send.task.origin || send.from != r) {
          violation("task delegated by a rank that does not own it", r, t);
        }
        const OffloadQuota& q = engine.quota();
        auto allowed = q.target.find(*decision.target);
        if (allowed == q.target.end() || q.usedToward(*decision.target) > allowed->second) {
          violation("offload beyond quota", r, t);
        }
      }
      Event a;
      a.time = t + transferTime(send.bytes(), sc_.cluster.network);
      a.kind = kArrive;
      a.rank = send.to;
      a.task = send.task.id;
      a.message = send;
      push(std::move(a));
    }
  }

  [[noreturn]] void deadlock(double t) const {
    std::ostringstream os;
    os << "deadlock in step " << step_ << " at t=" << t << ":";
    for (RankId r = 0; r < n_; ++r) {
      const RankEngine& e = engines_[r];
      const RankStep& rs = ranks_[r];
      os << " [rank " << r << " own=" << e.ownOutstanding() << " hosted=" << e.hostedOutstanding()
         << " ready=" << e.readyCount() << " inbox=" << rs.inbox.size()
         << " stalled=" << rs.stalled << "]";
    }
    throw DeadlockError(os.str());
  }

  StepRecord runStep(int step) {
    step_ = step;
    const auto& counts = workload_.counts.at(static_cast<std::size_t>(step - 1));
    ranks_.assign(static_cast<std::size_t>(n_), RankStep{});
    firstId_ = nextId_;
    if (opt_.checkInvariants) {
      finalized_.assign(static_cast<std::size_t>(workload_.totalTasks(step)), 0);
    }
    std::vector<double> omegaUsed(static_cast<std::size_t>(n_));
    for (RankId r = 0; r < n_; ++r) {
      RankStep& rs = ranks_[r];
      rs.cores.assign(static_cast<std::size_t>(sc_.cluster.coresPerRank), Core{});
      rs.speed = speedAt(r, step);
      for (const Disturbance& d : sc_.disturbances) {
        if (d.kind == Disturbance::Kind::Delay && d.rank == r && d.activeAt(step)) {
          rs.stallEnd += d.delay;
        }
      }
      if (rs.stallEnd > 0.0) {
        rs.stalled = true;
        Event e;
        e.time = rs.stallEnd;
        e.kind = kStallEnd;
        e.rank = r;
        push(std::move(e));
      }
      engines_[r].beginStep(quota_[r]);
      omegaUsed[r] = diffusion_[r].omegaDiff;
    }
    for (RankId r = 0; r < n_; ++r) spawnAll(r, counts[r], 0.0);
    for (RankId r = 0; r < n_; ++r) {
      dispatch(r, 0.0);
      queueCheck(r, 0.0);
    }

    double now = 0.0;
    while (!queue_.empty()) {
      Event e = queue_.top();
      queue_.pop();
      now = e.time;
      switch (e.kind) {
        case kArrive: onArrive(e); break;
        case kTaskEnd: onTaskEnd(e); break;
        case kStallEnd: onStallEnd(e); break;
        case kBlockCheck: onBlockCheck(e); break;
        default: break;
      }
      if (opt_.checkInvariants) {
        checkWorkConservation(e.rank, now);
        if (e.message) checkWorkConservation(e.message->to, now);
      }
    }

    for (RankId r = 0; r < n_; ++r) {
      const RankEngine& e = engines_[r];
      const RankStep& rs = ranks_[r];
      const bool busy = std::any_of(rs.cores.begin(), rs.cores.end(),
                                    [](const Core& c) { return c.busy; });
      if (e.ownOutstanding() != 0 || e.hostedOutstanding() != 0 || !rs.inbox.empty() ||
          rs.stalled || busy || e.readyCount() != 0) {
        deadlock(now);
      }
    }
    if (opt_.checkInvariants) {
      for (std::size_t i = 0; i < finalized_.size(); ++i) {
        if (finalized_[i] != 1) {
          violation("task " + std::to_string(firstId_ + i) + " finalized " +
                        std::to_string(finalized_[i]) + " times",
                    -1, now);
        }
      }
    }

    StepRecord record = measure(step, counts);
    for (RankId r = 0; r < n_; ++r) record.perRank[r].omegaDiff = quantize(omegaUsed[r]);
    return record;
  }

  // ---- statistics ----------------------------------------------------------

  StepRecord measure(int step, const std::vector<int>& counts) {
    StepRecord record;
    record.step = step;
    record.perRank.resize(static_cast<std::size_t>(n_));

    double barrier = 0.0;
    for (RankId r = 0; r < n_; ++r) barrier = std::max(barrier, ranks_[r].finish);
    record.makespan = barrier + workload_.stepOverhead.at(static_cast<std::size_t>(step - 1)) +
                      sc_.balancing.stepOverhead;

    // Between local-work exhaustion and the barrier a rank waits on every
    // rank still running; each interval is shared among them.
    std::vector<double> finishTimes;
    for (RankId r = 0; r < n_; ++r) finishTimes.push_back(ranks_[r].finish);
    std::sort(finishTimes.begin(), finishTimes.end());
    finishTimes.erase(std::unique(finishTimes.begin(), finishTimes.end()), finishTimes.end());

    std::vector<std::vector<double>> raw(n_, std::vector<double>(n_, 0.0));
    std::vector<std::vector<double>> net(n_, std::vector<double>(n_, 0.0));
    const double cores = sc_.cluster.coresPerRank;
    for (RankId r = 0; r < n_; ++r) {
      const RankStep& rs = ranks_[r];
      double exhausted = rs.stallEnd;
      double ownTime = 0.0;
      int ownCount = 0;
      for (const Exec& x : rs.execs) {
        if (x.kind == ExecKind::Own) {
          exhausted = std::max(exhausted, x.start);
          ownTime += x.end - x.start;
          ++ownCount;
        }
      }
      std::size_t pending = 0;
      std::size_t received = 0;
      for (const Exec& x : rs.execs) {
        if (x.kind == ExecKind::Recompute ||
            (x.kind == ExecKind::Own && x.start <= exhausted && x.end > exhausted)) {
          ++pending;
        }
        if (x.kind == ExecKind::Hosted && x.end > exhausted) ++received;
      }
      if (ownCount > 0) stats_[r].recordTaskCost(ownTime / ownCount / cores);
      RankStatistics& st = stats_[r];
      st.pendingTasks = pending;
      st.receivedTasks = received;
      st.ownTasks = static_cast<std::size_t>(counts[r]);

      double blockedTotal = 0.0;
      for (const auto& [victim, seconds] : rs.blocked) {
        raw[r][victim] += seconds;
        net[r][victim] += seconds;
        blockedTotal += seconds;
      }

      struct Segment {
        double length;
        std::vector<RankId> blockers;
      };
      std::vector<Segment> segments;
      double spanTotal = 0.0;
      double from = exhausted;
      for (double until : finishTimes) {
        if (until <= from) continue;
        Segment seg{until - from, {}};
        for (RankId j = 0; j < n_; ++j) {
          if (j != r && ranks_[j].finish >= until) seg.blockers.push_back(j);
        }
        if (seg.blockers.empty()) break;
        for (RankId j : seg.blockers) {
          raw[r][j] += seg.length / static_cast<double>(seg.blockers.size());
        }
        spanTotal += seg.length;
        segments.push_back(std::move(seg));
        from = until;
      }

      // Time still spent on own or hosted work is not waiting; it is taken
      // off the earliest intervals, together with time already counted as
      // blocked.
      const double tEff = st.hasTaskCost() ? st.taskCost() : 0.0;
      const double penalty =
          sc_.balancing.penaltyPerReceived >= 0.0 ? sc_.balancing.penaltyPerReceived : tEff;
      const double kept = reducedWaitTime(std::max(0.0, spanTotal - blockedTotal), pending, tEff,
                                          received, penalty);
      double strip = spanTotal - kept;
      for (Segment& seg : segments) {
        const double cut = std::min(strip, seg.length);
        strip -= cut;
        const double left = seg.length - cut;
        if (left <= 0.0) continue;
        for (RankId j : seg.blockers) net[r][j] += left / static_cast<double>(seg.blockers.size());
      }
    }

    std::vector<double> all;
    all.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
    for (RankId i = 0; i < n_; ++i) {
      for (RankId j = 0; j < n_; ++j) {
        if (i != j) all.push_back(raw[i][j]);
      }
    }
    const double tMin = all.empty() ? 0.0 : calibrationThreshold(all);

    for (RankId r = 0; r < n_; ++r) {
      RankStatistics& st = stats_[r];
      for (RankId j = 0; j < n_; ++j) {
        if (j == r) continue;
        double w = raw[r][j] < tMin ? 0.0 : net[r][j];
        w = quantize(w);
        st.recordWait(j, w);
        if (w > 0.0) record.waitEdges.push_back({r, j, w});
      }
      const EngineCounters& c = engines_[r].counters();
      RankStepRecord& pr = record.perRank[r];
      pr.timeInStep = quantize(ranks_[r].finish);
      pr.ownTasks = counts[r];
      pr.tasksExecuted = c.executedOwn + c.executedHosted + c.recomputes;
      pr.tasksOffloadedTo = c.offloadedTo;
      for (RankId j = 0; j < n_; ++j) {
        if (j == r) continue;
        auto it = sent_[r].try_emplace(j, sc_.balancing.omegaAvg,
                                       static_cast<std::size_t>(sc_.balancing.window)).first;
        auto n = c.offloadedTo.find(j);
        it->second.push(n == c.offloadedTo.end() ? 0.0 : n->second);
      }
      pr.quotaAllowed = engines_[r].quota().target;
      pr.tasksHosted = c.hosted;
      pr.recomputes = c.recomputes;
      pr.wastedReturns = c.wastedReturns;
      pr.emergencies = c.emergencies;
      for (const auto& [rank, weight] : engines_[r].blacklist().weights()) {
        pr.blacklistWeights[rank] = quantize(weight);
      }
    }
    record.makespan = quantize(record.makespan);

    Snapshot snap;
    snap.stats = stats_;
    snap.sentAvg.resize(static_cast<std::size_t>(n_));
    snap.sentLatest.resize(static_cast<std::size_t>(n_));
    for (RankId r = 0; r < n_; ++r) {
      for (const auto& [target, avg] : sent_[r]) {
        snap.sentAvg[r][target] = avg.value();
        snap.sentLatest[r][target] = avg.window().front();
      }
      hosted_[r].push(static_cast<double>(engines_[r].counters().hosted));
      snap.hostedLatest[r] = hosted_[r].window().front();
      snap.hostedAvg[r] = hosted_[r].value();
    }
    history_.push_back(std::move(snap));
    while (history_.size() > static_cast<std::size_t>(std::max(1, sc_.balancing.staleness))) {
      history_.pop_front();
    }

    const WaitGraph graph = smoothedGraph(stats_);
    if (!graph.edges().empty()) {
      record.criticalRank = criticalRank(graph);
      record.optimalVictim =
          optimalVictim(graph, blacklistUnion(), record.criticalRank).value_or(-1);
    }
    return record;
  }

  [[nodiscard]] WaitGraph smoothedGraph(const std::vector<RankStatistics>& stats) const {
    WaitGraph graph(n_);
    for (const RankStatistics& st : stats) {
      for (const auto& [peer, avg] : st.waits()) {
        if (!avg.empty()) graph.addWait(st.rank(), peer, avg.value());
      }
    }
    return graph;
  }

  [[nodiscard]] std::set<RankId> blacklistUnion() const {
    std::set<RankId> out;
    for (const RankEngine& e : engines_) {
      for (const auto& [rank, weight] : e.blacklist().weights()) out.insert(rank);
    }
    return out;
  }

  // ---- balancing round -----------------------------------------------------

  void balance(int step) {
    const BalancingMode mode = sc_.balancing.mode;
    const bool hasNext = step < sc_.steps;
    const auto& nextCounts =
        workload_.counts.at(static_cast<std::size_t>(hasNext ? step : step - 1));

    if (mode == BalancingMode::Ccp) {
      quota_ = ccpPartition(nextCounts, n_);
    } else if (mode == BalancingMode::Diffusion || mode == BalancingMode::CcpDiffusion) {
      const bool fresh =
          history_.size() >= static_cast<std::size_t>(std::max(1, sc_.balancing.staleness));
      if (fresh) {
        const Snapshot& snap = history_.front();
        const WaitGraph graph = smoothedGraph(snap.stats);
        const std::set<RankId> blacklist = blacklistUnion();
        const RankId critical = criticalRank(graph);
        for (RankId r = 0; r < n_; ++r) {
          ReactiveInputs in;
          in.self = r;
          if (snap.stats[r].hasTaskCost()) in.taskCost = snap.stats[r].taskCost();
          in.smoothed = snap.sentAvg[r];
          in.hostedLatest = snap.hostedLatest;
          in.hostedSmoothed = snap.hostedAvg;
          for (const auto& [target, n] : snap.sentLatest[r]) {
            if (n > 0) in.current[target] = static_cast<int>(n);
          }
          for (RankId j = 0; j < n_; ++j) {
            if (engines_[j].counters().offloadedTo.contains(r)) in.hostedFrom.insert(j);
          }
          in.maxTasks = nextCounts[r];
          optimal_[r] = reactiveStep(graph, in, blacklist, optimal_[r]);
          const QuotaMap previous = quota_[r];
          bool acting = critical == r;
          for (const auto& [target, n] : previous) acting = acting || blacklist.contains(target);
          if (acting) quota_[r] = diffuse(diffusion_[r].omegaDiff, optimal_[r], previous);
          if (acting && sc_.balancing.reinforce) reinforce(diffusion_[r], optimal_[r], previous);
        }
      }
    }
    for (RankEngine& e : engines_) e.blacklist().decay();
  }

  const Scenario& sc_;
  RunOptions opt_;
  int n_;
  Workload workload_;
  std::vector<double> speeds_;
  std::vector<RankEngine> engines_;
  std::vector<RankStatistics> stats_;
  std::vector<DiffusionState> diffusion_;
  std::vector<QuotaMap> quota_;
  std::vector<QuotaMap> optimal_;
  std::deque<Snapshot> history_;
  std::vector<std::map<RankId, MovingAverage>> sent_;
  std::vector<MovingAverage> hosted_;

  std::priority_queue<Event, std::vector<Event>, LaterFirst> queue_;
  std::uint64_t seq_ = 0;
  TaskId nextId_ = 0;
  TaskId firstId_ = 0;
  int step_ = 0;
  std::vector<RankStep> ranks_;
  std::vector<int> finalized_;
};

}  // namespace

EventLog runSimulation(const Scenario& scenario, const RunOptions& options) {
  if (const auto problems = validateScenario(scenario); !problems.empty()) {
    throw ScenarioError(problems.front());
  }
  Simulation sim(scenario, options);
  return sim.run();
}

}  // namespace reactive
