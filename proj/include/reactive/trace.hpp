#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "reactive/types.hpp"

namespace reactive {

struct WaitEdge {
  RankId from = 0;
  RankId to = 0;
  double seconds = 0.0;

  friend bool operator==(const WaitEdge&, const WaitEdge&) = default;
};

/// What one rank did during one step.
struct RankStepRecord {
  double timeInStep = 0.0;
  int ownTasks = 0;
  int tasksExecuted = 0;
  QuotaMap tasksOffloadedTo;
  QuotaMap quotaAllowed;
  int tasksHosted = 0;
  int recomputes = 0;
  int wastedReturns = 0;
  int emergencies = 0;
  double omegaDiff = 1.0;
  std::map<RankId, double> blacklistWeights;

  friend bool operator==(const RankStepRecord&, const RankStepRecord&) = default;
};

struct StepRecord {
  int step = 0;
  double makespan = 0.0;
  /// Roles found on the smoothed wait graph after this step; -1 if none.
  RankId criticalRank = -1;
  RankId optimalVictim = -1;
  std::vector<RankStepRecord> perRank;
  /// This step's calibrated, reduced waits.
  std::vector<WaitEdge> waitEdges;

  [[nodiscard]] double totalWait() const;
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EventLog {
  std::string scenario;
  std::string mode;
  int nRanks = 0;
  std::vector<StepRecord> steps;
};

/// Rounds to the 9 significant digits used by every export.
double quantize(double value);

/// Raised when an export target cannot be written or a trace cannot be read.
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header of the per-(step, rank) CSV.
const std::vector<std::string>& csvColumns();
std::string toCsv(const EventLog& log);
void exportCsv(const EventLog& log, const std::filesystem::path& path);
/// Inverse of toCsv for the per-step fields.
std::vector<StepRecord> parseCsv(const std::string& text);

/// Graphviz description of one step: wait edges in red labelled with
/// seconds, offload edges in black labelled sent/allowed.
std::string waitGraphDot(const StepRecord& record);
void exportWaitGraph(const StepRecord& record, const std::filesystem::path& path);

/// Trailing moving average of a per-step metric, evaluated at every step.
std::vector<double> glidingAverageSeries(std::span<const double> metric, double decay,
                                         std::size_t capacity);

}  // namespace reactive
