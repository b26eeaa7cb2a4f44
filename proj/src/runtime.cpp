#include "reactive/runtime.hpp"

#include <string>

namespace reactive {

RankEngine::RankEngine(RankId rank, int cores, int starvationC)
    : rank_(rank), cores_(cores), starvationC_(starvationC) {
  if (cores <= 0) throw std::invalid_argument("a rank needs at least one core");
  if (starvationC < 0) throw std::invalid_argument("starvation constant must be >= 0");
}

void RankEngine::beginStep(const QuotaMap& quota) {
  QuotaMap filtered;
  for (const auto& [target, n] : quota) {
    if (target != rank_ && n > 0) filtered[target] = n;
  }
  quota_.reset(filtered);
  cursor_ = 0;
  emergencyThisStep_.clear();
  counters_ = EngineCounters{};
}

std::optional<RankId> RankEngine::pickTarget() {
  auto positive = [](const auto& entry) { return entry.second > 0; };
  auto it = quota_.live.lower_bound(cursor_);
  for (; it != quota_.live.end(); ++it) {
    if (positive(*it)) return it->first;
  }
  for (it = quota_.live.begin(); it != quota_.live.end() && it->first < cursor_; ++it) {
    if (positive(*it)) return it->first;
  }
  return std::nullopt;
}

SpawnDecision RankEngine::spawnTask(TaskDescriptor task) {
  ++counters_.spawned;
  ++ownOutstanding_;
  task.origin = rank_;
  SpawnDecision decision;
  const bool notStarved = readyCount() > static_cast<std::size_t>(starvationC_);
  if (notStarved && task.offloadable) {
    if (auto target = pickTarget(); target && quota_.tryTake(*target)) {
      cursor_ = *target + 1;
      task.state = TaskState::Offloaded;
      awaiting_.emplace(task.id, Away{task, *target});
      ++counters_.offloadedTo[*target];
      decision.target = target;
      decision.send = Message{Message::Kind::TaskSend, rank_, *target, task};
      return decision;
    }
  }
  task.priority = Priority::Low;
  task.state = TaskState::Enqueued;
  low_.push_back(task);
  return decision;
}

std::optional<TaskDescriptor> RankEngine::executeNext() {
  std::deque<TaskDescriptor>* queue = !high_.empty() ? &high_ : (!low_.empty() ? &low_ : nullptr);
  if (queue == nullptr) return std::nullopt;
  TaskDescriptor task = queue->front();
  queue->pop_front();
  if (task.origin != rank_) task.state = TaskState::ExecutingRemote;
  return task;
}

void RankEngine::completeLocal(const TaskDescriptor& task) {
  if (task.origin != rank_) {
    throw ConsistencyError("completeLocal called for a hosted task");
  }
  if (ownOutstanding_ <= 0) throw ConsistencyError("no own task left to complete");
  if (task.state != TaskState::RecomputedLocally) ++counters_.executedOwn;
  --ownOutstanding_;
}

Message RankEngine::completeRemote(const TaskDescriptor& task) {
  if (task.origin == rank_) {
    throw ConsistencyError("completeRemote called for an own task");
  }
  ++counters_.executedHosted;
  --hostedOutstanding_;
  TaskDescriptor result = task;
  result.state = TaskState::Returned;
  return Message{Message::Kind::TaskReturn, rank_, task.origin, result};
}

std::vector<Delivery> RankEngine::pollIncoming(const std::vector<Message>& arrived) {
  std::vector<Delivery> out;
  out.reserve(arrived.size());
  for (const Message& msg : arrived) {
    if (msg.to != rank_) throw ConsistencyError("message delivered to the wrong rank");
    if (msg.kind == Message::Kind::TaskSend) {
      TaskDescriptor task = msg.task;
      task.priority = Priority::High;
      task.state = TaskState::Enqueued;
      high_.push_back(task);
      ++hostedOutstanding_;
      ++counters_.hosted;
      out.push_back({Delivery::Kind::Hosted, task.id, msg.from});
      continue;
    }
    auto it = awaiting_.find(msg.task.id);
    if (it == awaiting_.end()) {
      throw ConsistencyError("result for task " + std::to_string(msg.task.id) +
                             " that was never offloaded");
    }
    if (it->second.recomputed) {
      ++counters_.wastedReturns;
      out.push_back({Delivery::Kind::Wasted, msg.task.id, msg.from});
    } else {
      ++counters_.returned;
      --ownOutstanding_;
      out.push_back({Delivery::Kind::Returned, msg.task.id, msg.from});
    }
    awaiting_.erase(it);
  }
  releaseMaskIfDone();
  return out;
}

std::optional<TaskId> RankEngine::oldestOutstanding() const {
  for (const auto& [id, away] : awaiting_) {
    if (!away.recomputed) return id;
  }
  return std::nullopt;
}

RankId RankEngine::victimOf(TaskId id) const {
  auto it = awaiting_.find(id);
  if (it == awaiting_.end()) throw ConsistencyError("task is not away");
  return it->second.victim;
}

bool RankEngine::recordEmergency(RankId victim) {
  if (mask_ || emergencyThisStep_.count(victim) != 0) return false;
  emergencyThisStep_.insert(victim);
  blacklist_.recordEmergency(victim);
  ++counters_.emergencies;
  return true;
}

Recompute RankEngine::urgentRecompute(TaskId id) {
  auto it = awaiting_.find(id);
  if (it == awaiting_.end() || it->second.recomputed) {
    throw ConsistencyError("no retained copy for task " + std::to_string(id));
  }
  Away& away = it->second;
  away.recomputed = true;
  ++counters_.recomputes;
  const bool blacklisted = recordEmergency(away.victim);
  if (maskEmergencies_ && !mask_) mask_ = away.victim;
  TaskDescriptor copy = away.copy;
  copy.priority = Priority::High;
  copy.state = TaskState::RecomputedLocally;
  return Recompute{copy, away.victim, blacklisted};
}

bool RankEngine::noteBlockedOn(TaskId id) { return recordEmergency(victimOf(id)); }

void RankEngine::releaseMaskIfDone() {
  if (!mask_) return;
  for (const auto& [id, away] : awaiting_) {
    if (away.victim == *mask_) return;
  }
  mask_.reset();
}

}  // namespace reactive
