#include "reactive/balancer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reactive {

void WaitGraph::addWait(RankId from, RankId to, double seconds) {
  if (from == to || !(seconds > 0.0)) return;
  edges_[{from, to}] += seconds;
}

double WaitGraph::inbound(RankId rank) const {
  double sum = 0.0;
  for (const auto& [edge, w] : edges_) {
    if (edge.second == rank) sum += w;
  }
  return sum;
}

double WaitGraph::outbound(RankId rank) const {
  double sum = 0.0;
  for (const auto& [edge, w] : edges_) {
    if (edge.first == rank) sum += w;
  }
  return sum;
}

double WaitGraph::total() const {
  double sum = 0.0;
  for (const auto& [edge, w] : edges_) sum += w;
  return sum;
}

void OffloadQuota::reset(const QuotaMap& next) {
  target.clear();
  for (const auto& [rank, n] : next) {
    if (n > 0) target[rank] = n;
  }
  live = target;
}

int OffloadQuota::usedToward(RankId rank) const {
  auto t = target.find(rank);
  if (t == target.end()) return 0;
  auto l = live.find(rank);
  return t->second - (l == live.end() ? 0 : l->second);
}

int OffloadQuota::totalUsed() const {
  int used = 0;
  for (const auto& [rank, n] : target) used += usedToward(rank);
  return used;
}

bool OffloadQuota::tryTake(RankId rank) {
  auto it = live.find(rank);
  if (it == live.end() || it->second <= 0) return false;
  --it->second;
  return true;
}

void Blacklist::recordEmergency(RankId victim) { weights_[victim] += 1.0; }

void Blacklist::decay() {
  for (auto it = weights_.begin(); it != weights_.end();) {
    it->second *= kDecay;
    if (it->second < kThreshold) {
      it = weights_.erase(it);
    } else {
      ++it;
    }
  }
}

double Blacklist::weight(RankId rank) const {
  auto it = weights_.find(rank);
  return it == weights_.end() ? 0.0 : it->second;
}

RankId criticalRank(const WaitGraph& graph) {
  std::vector<double> inbound(static_cast<std::size_t>(std::max(graph.ranks(), 1)), 0.0);
  for (const auto& [edge, w] : graph.edges()) {
    if (edge.second >= 0 && edge.second < graph.ranks()) inbound[edge.second] += w;
  }
  RankId best = 0;
  for (RankId r = 1; r < graph.ranks(); ++r) {
    if (inbound[r] > inbound[best]) best = r;
  }
  return best;
}

std::optional<RankId> optimalVictim(const WaitGraph& graph,
                                    const std::set<RankId>& blacklist,
                                    RankId self) {
  std::vector<double> outbound(static_cast<std::size_t>(std::max(graph.ranks(), 1)), 0.0);
  for (const auto& [edge, w] : graph.edges()) {
    if (edge.first >= 0 && edge.first < graph.ranks()) outbound[edge.first] += w;
  }
  std::optional<RankId> best;
  for (RankId r = 0; r < graph.ranks(); ++r) {
    if (r == self || blacklist.count(r) != 0 || !(outbound[r] > 0.0)) continue;
    if (!best || outbound[r] > outbound[*best]) best = r;
  }
  return best;
}

QuotaMap reactiveStep(const WaitGraph& graph, const ReactiveInputs& in,
                      const std::set<RankId>& blacklist, QuotaMap optimal) {
  if (in.taskCost && *in.taskCost > 0.0 && graph.ranks() > 0 &&
      criticalRank(graph) == in.self) {
    std::set<RankId> excluded = blacklist;
    excluded.insert(in.hostedFrom.begin(), in.hostedFrom.end());
    if (auto victim = optimalVictim(graph, excluded, in.self)) {
      const double t = *in.taskCost;
      auto sentNow = [&in](RankId rank) {
        auto it = in.current.find(rank);
        return it == in.current.end() ? 0.0 : static_cast<double>(it->second);
      };
      auto sentAvg = [&](RankId rank) {
        auto it = in.smoothed.find(rank);
        return it == in.smoothed.end() ? sentNow(rank) : it->second;
      };
      double movedTotal = 0.0;
      std::set<RankId> targets;
      for (const auto& [rank, n] : in.current) targets.insert(rank);
      for (const auto& [rank, n] : in.smoothed) targets.insert(rank);
      for (RankId rank : targets) movedTotal += sentNow(rank) - sentAvg(rank);
      double movedToVictim = sentNow(*victim) - sentAvg(*victim);
      auto latest = in.hostedLatest.find(*victim);
      auto average = in.hostedSmoothed.find(*victim);
      if (latest != in.hostedLatest.end() && average != in.hostedSmoothed.end()) {
        movedToVictim = latest->second - average->second;
      }
      const double gap = graph.outbound(*victim) - t * (movedTotal + movedToVictim);
      int next = static_cast<int>(sentNow(*victim)) + static_cast<int>(0.5 * gap / t);
      int others = 0;
      for (const auto& [rank, n] : optimal) {
        if (rank != *victim) others += n;
      }
      next = std::clamp(next, 0, std::max(0, in.maxTasks - others));
      optimal[*victim] = next;
    }
  }
  for (RankId rank : blacklist) {
    auto it = optimal.find(rank);
    if (it != optimal.end()) it->second = 0;
  }
  for (auto it = optimal.begin(); it != optimal.end();) {
    it = it->second == 0 ? optimal.erase(it) : std::next(it);
  }
  return optimal;
}

int roundHalfAway(double value) { return static_cast<int>(std::lround(value)); }

QuotaMap diffuse(double omegaDiff, const QuotaMap& optimal, const QuotaMap& current) {
  std::set<RankId> targets;
  for (const auto& [rank, n] : optimal) targets.insert(rank);
  for (const auto& [rank, n] : current) targets.insert(rank);
  QuotaMap next;
  for (RankId rank : targets) {
    auto o = optimal.find(rank);
    auto c = current.find(rank);
    const double opt = o == optimal.end() ? 0.0 : o->second;
    const double cur = c == current.end() ? 0.0 : c->second;
    const int n = roundHalfAway(omegaDiff * opt + (1.0 - omegaDiff) * cur);
    if (n > 0) next[rank] = n;
  }
  return next;
}

double quotaDistance(const QuotaMap& a, const QuotaMap& b) {
  double sum = 0.0;
  for (const auto& [rank, n] : a) {
    auto it = b.find(rank);
    sum += std::abs(n - (it == b.end() ? 0 : it->second));
  }
  for (const auto& [rank, n] : b) {
    if (a.find(rank) == a.end()) sum += std::abs(n);
  }
  return sum;
}

double reinforceOmega(double omegaDiff, double omegaReinf, double numerator,
                      double denominator) {
  if (denominator > 0.0 && numerator / denominator >= omegaReinf) {
    return std::min(omegaDiff + 0.1, DiffusionState::kMaxOmega);
  }
  return std::max(0.9 * omegaDiff, DiffusionState::kMinOmega);
}

double reinforce(DiffusionState& state, const QuotaMap& optimalNow,
                 const QuotaMap& offloadNow) {
  const double numerator = quotaDistance(optimalNow, offloadNow);
  const double denominator =
      state.hasHistory ? quotaDistance(state.prevOptimal, state.prevOffload) : 0.0;
  state.omegaDiff = reinforceOmega(state.omegaDiff, state.omegaReinf, numerator, denominator);
  state.prevOptimal = optimalNow;
  state.prevOffload = offloadNow;
  state.hasHistory = true;
  return state.omegaDiff;
}

std::vector<QuotaMap> ccpPartition(const std::vector<int>& taskCounts, int nRanks) {
  if (nRanks <= 0) throw std::invalid_argument("ccp partition needs at least one rank");
  if (static_cast<int>(taskCounts.size()) != nRanks) {
    throw std::invalid_argument("ccp partition: one task count per rank required");
  }
  for (int c : taskCounts) {
    if (c < 0) throw std::invalid_argument("ccp partition: negative task count");
  }
  const long long total = std::accumulate(taskCounts.begin(), taskCounts.end(), 0LL);
  const long long base = total / nRanks;
  const long long extra = total % nRanks;

  // Piece r of the chain is [cut[r], cut[r+1]); rank s owns [own[s], own[s+1]).
  std::vector<long long> cut(nRanks + 1, 0);
  std::vector<long long> own(nRanks + 1, 0);
  for (int r = 0; r < nRanks; ++r) {
    cut[r + 1] = cut[r] + base + (r < extra ? 1 : 0);
    own[r + 1] = own[r] + taskCounts[r];
  }

  std::vector<QuotaMap> plan(nRanks);
  for (int source = 0; source < nRanks; ++source) {
    for (int target = 0; target < nRanks; ++target) {
      if (source == target) continue;
      const long long lo = std::max(own[source], cut[target]);
      const long long hi = std::min(own[source + 1], cut[target + 1]);
      if (hi > lo) plan[source][target] = static_cast<int>(hi - lo);
    }
  }
  return plan;
}

std::vector<int> applyPartition(const std::vector<int>& taskCounts,
                                const std::vector<QuotaMap>& plan) {
  std::vector<int> load = taskCounts;
  for (std::size_t source = 0; source < plan.size(); ++source) {
    for (const auto& [target, n] : plan[source]) {
      load[source] -= n;
      load[static_cast<std::size_t>(target)] += n;
    }
  }
  return load;
}

}  // namespace reactive
