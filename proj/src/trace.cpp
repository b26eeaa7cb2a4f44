#include "reactive/trace.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "reactive/stats.hpp"

namespace reactive {

double StepRecord::totalWait() const {
  double sum = 0.0;
  for (const WaitEdge& e : waitEdges) sum += e.seconds;
  return sum;
}

namespace {

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

template <typename Map>
std::string mapField(const Map& map) {
  std::string out;
  for (const auto& [key, value] : map) {
    if (!out.empty()) out += ';';
    out += std::to_string(key);
    out += ':';
    if constexpr (std::is_floating_point_v<typename Map::mapped_type>) {
      out += fmt(value);
    } else {
      out += std::to_string(value);
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double toDouble(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw TraceError("not a number: '" + s + "'");
  return v;
}

int toInt(const std::string& s) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw TraceError("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

template <typename Map>
Map parseMap(const std::string& text) {
  Map out;
  if (text.empty()) return out;
  for (const std::string& item : split(text, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw TraceError("malformed map entry '" + item + "'");
    const RankId key = toInt(item.substr(0, colon));
    const std::string value = item.substr(colon + 1);
    if constexpr (std::is_floating_point_v<typename Map::mapped_type>) {
      out[key] = toDouble(value);
    } else {
      out[key] = toInt(value);
    }
  }
  return out;
}

void writeFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError("cannot write " + path.string());
  out << text;
  if (!out) throw TraceError("failed writing " + path.string());
}

}  // namespace

double quantize(double value) { return std::strtod(fmt(value).c_str(), nullptr); }

const std::vector<std::string>& csvColumns() {
  static const std::vector<std::string> columns = {
      "step",           "rank",          "makespan",      "critical_rank",
      "optimal_victim", "time_in_step",  "own_tasks",     "tasks_executed",
      "tasks_offloaded", "offloaded_to", "quota_allowed", "tasks_hosted",
      "recomputes",     "wasted_returns", "emergencies",  "omega_diff",
      "blacklist",      "waits"};
  return columns;
}

std::string toCsv(const EventLog& log) {
  std::string out;
  for (std::size_t i = 0; i < csvColumns().size(); ++i) {
    if (i > 0) out += ',';
    out += csvColumns()[i];
  }
  out += '\n';
  for (const StepRecord& s : log.steps) {
    for (std::size_t r = 0; r < s.perRank.size(); ++r) {
      const RankStepRecord& p = s.perRank[r];
      int offloaded = 0;
      for (const auto& [target, n] : p.tasksOffloadedTo) offloaded += n;
      std::map<RankId, double> waits;
      for (const WaitEdge& e : s.waitEdges) {
        if (e.from == static_cast<RankId>(r)) waits[e.to] = e.seconds;
      }
      std::ostringstream row;
      row << s.step << ',' << r << ',' << fmt(s.makespan) << ',' << s.criticalRank << ','
          << s.optimalVictim << ',' << fmt(p.timeInStep) << ',' << p.ownTasks << ','
          << p.tasksExecuted << ',' << offloaded << ',' << mapField(p.tasksOffloadedTo) << ','
          << mapField(p.quotaAllowed) << ',' << p.tasksHosted << ',' << p.recomputes << ','
          << p.wastedReturns << ',' << p.emergencies << ',' << fmt(p.omegaDiff) << ','
          << mapField(p.blacklistWeights) << ',' << mapField(waits) << '\n';
      out += row.str();
    }
  }
  return out;
}

void exportCsv(const EventLog& log, const std::filesystem::path& path) {
  writeFile(path, toCsv(log));
}

std::vector<StepRecord> parseCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw TraceError("empty trace");
  if (split(line, ',').size() != csvColumns().size()) throw TraceError("unexpected header");
  std::vector<StepRecord> steps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != csvColumns().size()) throw TraceError("wrong field count: " + line);
    const int step = toInt(f[0]);
    const auto rank = static_cast<std::size_t>(toInt(f[1]));
    if (steps.empty() || steps.back().step != step) {
      StepRecord s;
      s.step = step;
      s.makespan = toDouble(f[2]);
      s.criticalRank = toInt(f[3]);
      s.optimalVictim = toInt(f[4]);
      steps.push_back(std::move(s));
    }
    StepRecord& s = steps.back();
    if (rank != s.perRank.size()) throw TraceError("ranks out of order in step " + f[0]);
    RankStepRecord p;
    p.timeInStep = toDouble(f[5]);
    p.ownTasks = toInt(f[6]);
    p.tasksExecuted = toInt(f[7]);
    p.tasksOffloadedTo = parseMap<QuotaMap>(f[9]);
    p.quotaAllowed = parseMap<QuotaMap>(f[10]);
    p.tasksHosted = toInt(f[11]);
    p.recomputes = toInt(f[12]);
    p.wastedReturns = toInt(f[13]);
    p.emergencies = toInt(f[14]);
    p.omegaDiff = toDouble(f[15]);
    p.blacklistWeights = parseMap<std::map<RankId, double>>(f[16]);
    for (const auto& [to, seconds] : parseMap<std::map<RankId, double>>(f[17])) {
      s.waitEdges.push_back({static_cast<RankId>(rank), to, seconds});
    }
    s.perRank.push_back(std::move(p));
  }
  return steps;
}

std::string waitGraphDot(const StepRecord& record) {
  std::ostringstream out;
  out << "digraph step" << record.step << " {\n";
  out << "  node [shape=circle];\n";
  for (std::size_t r = 0; r < record.perRank.size(); ++r) {
    out << "  " << r << " [label=\"" << r << "\"";
    if (static_cast<RankId>(r) == record.criticalRank) {
      out << ", critical=true, style=filled, fillcolor=red";
    }
    if (static_cast<RankId>(r) == record.optimalVictim) {
      out << ", victim=true, style=filled, fillcolor=green";
    }
    out << "];\n";
  }
  for (const WaitEdge& e : record.waitEdges) {
    out << "  " << e.from << " -> " << e.to << " [color=red, label=\"" << fmt(e.seconds)
        << "s\"];\n";
  }
  for (std::size_t r = 0; r < record.perRank.size(); ++r) {
    const RankStepRecord& p = record.perRank[r];
    std::set<RankId> targets;
    for (const auto& [t, n] : p.tasksOffloadedTo) targets.insert(t);
    for (const auto& [t, n] : p.quotaAllowed) targets.insert(t);
    for (RankId t : targets) {
      auto sent = p.tasksOffloadedTo.find(t);
      auto allowed = p.quotaAllowed.find(t);
      out << "  " << r << " -> " << t << " [color=black, label=\""
          << (sent == p.tasksOffloadedTo.end() ? 0 : sent->second) << '/'
          << (allowed == p.quotaAllowed.end() ? 0 : allowed->second) << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

void exportWaitGraph(const StepRecord& record, const std::filesystem::path& path) {
  writeFile(path, waitGraphDot(record));
}

std::vector<double> glidingAverageSeries(std::span<const double> metric, double decay,
                                         std::size_t capacity) {
  if (metric.empty()) throw StatisticError("gliding average over an empty series");
  MovingAverage avg(decay, capacity);
  std::vector<double> out;
  out.reserve(metric.size());
  for (double v : metric) {
    avg.push(v);
    out.push_back(avg.value());
  }
  return out;
}

}  // namespace reactive
