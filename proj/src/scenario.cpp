#include "reactive/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "reactive/balancer.hpp"

namespace reactive {

using Json = nlohmann::ordered_json;

ScenarioError::ScenarioError(const std::string& message, std::optional<int> line,
                             std::optional<int> column)
    : std::runtime_error(line ? message + " at line " + std::to_string(*line) + ", column " +
                                    std::to_string(column.value_or(0))
                              : message),
      line_(line),
      column_(column) {}

namespace {

const char* kindName(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::Regular: return "regular";
    case WorkloadKind::StaticAmr: return "static_amr";
    case WorkloadKind::DynamicAmr: return "dynamic_amr";
    case WorkloadKind::Explicit: return "explicit";
  }
  return "regular";
}

WorkloadKind parseKind(const std::string& text) {
  if (text == "regular") return WorkloadKind::Regular;
  if (text == "static_amr") return WorkloadKind::StaticAmr;
  if (text == "dynamic_amr") return WorkloadKind::DynamicAmr;
  if (text == "explicit") return WorkloadKind::Explicit;
  throw ScenarioError("workload.kind: unknown workload kind '" + text + "'");
}

Json toJson(const Scenario& s) {
  Json cluster{{"ranks", s.cluster.nRanks},
               {"cores_per_rank", s.cluster.coresPerRank},
               {"core_speed", s.cluster.coreSpeed},
               {"speed_jitter", s.cluster.speedJitter},
               {"latency", s.cluster.network.latency},
               {"bandwidth", s.cluster.network.bandwidth},
               {"seed", s.cluster.seed}};
  const WorkloadParams& w = s.workload;
  Json workload{{"kind", kindName(w.kind)},
                {"total_tasks", w.totalTasks},
                {"min_count", w.minCount},
                {"max_count", w.maxCount},
                {"counts", w.counts},
                {"per_step_counts", w.perStepCounts},
                {"drift_amplitude", w.driftAmplitude},
                {"drift_period", w.driftPeriod},
                {"remesh_period", w.remeshPeriod},
                {"remesh_overhead", w.remeshOverhead},
                {"task_cost", w.taskCost},
                {"input_bytes", w.inputBytes},
                {"output_bytes", w.outputBytes},
                {"offloadable_fraction", w.offloadableFraction}};
  Json disturbances = Json::array();
  for (const Disturbance& d : s.disturbances) {
    if (d.kind == Disturbance::Kind::Delay) {
      disturbances.push_back({{"kind", "delay"},
                              {"rank", d.rank},
                              {"period", d.period},
                              {"offset", d.offset},
                              {"delay", d.delay}});
    } else {
      disturbances.push_back({{"kind", "slowdown"},
                              {"rank", d.rank},
                              {"first_step", d.firstStep},
                              {"last_step", d.lastStep},
                              {"speed_factor", d.speedFactor}});
    }
  }
  const BalancingParams& b = s.balancing;
  Json balancing{{"mode", toString(b.mode)},
                 {"omega_avg", b.omegaAvg},
                 {"window", b.window},
                 {"omega_diff", b.omegaDiff},
                 {"omega_reinf", b.omegaReinf},
                 {"reinforce", b.reinforce},
                 {"starvation_c", b.starvationC},
                 {"urgent_recompute", b.urgentRecompute},
                 {"staleness", b.staleness},
                 {"eager_pickup", b.eagerPickup},
                 {"penalty_per_received", b.penaltyPerReceived},
                 {"step_overhead", b.stepOverhead}};
  return Json{{"name", s.name},
              {"steps", s.steps},
              {"cluster", cluster},
              {"workload", workload},
              {"disturbances", disturbances},
              {"balancing", balancing}};
}

/// Reads members of one object, rejecting keys nobody asked for.
class Reader {
 public:
  Reader(const Json& object, std::string path) : obj_(object), path_(std::move(path)) {
    if (!obj_.is_object()) throw ScenarioError(where() + "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ScenarioError(where() + key + ": wrong type");
    }
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (seen_.count(key) == 0) throw ScenarioError(where() + key + ": unknown key");
    }
  }

  [[nodiscard]] std::string where() const { return path_.empty() ? "" : path_ + "."; }

 private:
  const Json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

Scenario fromJson(const Json& root) {
  Scenario s;
  Reader top(root, "");
  top.get("name", s.name);
  top.get("steps", s.steps);
  if (const Json* c = top.child("cluster")) {
    Reader r(*c, "cluster");
    r.get("ranks", s.cluster.nRanks);
    r.get("cores_per_rank", s.cluster.coresPerRank);
    r.get("core_speed", s.cluster.coreSpeed);
    r.get("speed_jitter", s.cluster.speedJitter);
    r.get("latency", s.cluster.network.latency);
    r.get("bandwidth", s.cluster.network.bandwidth);
    r.get("seed", s.cluster.seed);
    r.finish();
  }
  if (const Json* w = top.child("workload")) {
    Reader r(*w, "workload");
    std::string kind = kindName(s.workload.kind);
    r.get("kind", kind);
    s.workload.kind = parseKind(kind);
    r.get("total_tasks", s.workload.totalTasks);
    r.get("min_count", s.workload.minCount);
    r.get("max_count", s.workload.maxCount);
    r.get("counts", s.workload.counts);
    r.get("per_step_counts", s.workload.perStepCounts);
    r.get("drift_amplitude", s.workload.driftAmplitude);
    r.get("drift_period", s.workload.driftPeriod);
    r.get("remesh_period", s.workload.remeshPeriod);
    r.get("remesh_overhead", s.workload.remeshOverhead);
    r.get("task_cost", s.workload.taskCost);
    r.get("input_bytes", s.workload.inputBytes);
    r.get("output_bytes", s.workload.outputBytes);
    r.get("offloadable_fraction", s.workload.offloadableFraction);
    r.finish();
  }
  if (const Json* list = top.child("disturbances")) {
    if (!list->is_array()) throw ScenarioError("disturbances: expected an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      Reader r((*list)[i], "disturbances[" + std::to_string(i) + "]");
      Disturbance d;
      std::string kind = "delay";
      r.get("kind", kind);
      if (kind == "delay") {
        d.kind = Disturbance::Kind::Delay;
      } else if (kind == "slowdown") {
        d.kind = Disturbance::Kind::Slowdown;
      } else {
        throw ScenarioError(r.where() + "kind: unknown disturbance kind '" + kind + "'");
      }
      r.get("rank", d.rank);
      r.get("period", d.period);
      r.get("offset", d.offset);
      r.get("delay", d.delay);
      r.get("first_step", d.firstStep);
      r.get("last_step", d.lastStep);
      r.get("speed_factor", d.speedFactor);
      r.finish();
      s.disturbances.push_back(d);
    }
  }
  if (const Json* b = top.child("balancing")) {
    Reader r(*b, "balancing");
    std::string mode = toString(s.balancing.mode);
    r.get("mode", mode);
    auto parsed = parseBalancingMode(mode);
    if (!parsed) throw ScenarioError("balancing.mode: unknown mode '" + mode + "'");
    s.balancing.mode = *parsed;
    r.get("omega_avg", s.balancing.omegaAvg);
    r.get("window", s.balancing.window);
    r.get("omega_diff", s.balancing.omegaDiff);
    r.get("omega_reinf", s.balancing.omegaReinf);
    r.get("reinforce", s.balancing.reinforce);
    r.get("starvation_c", s.balancing.starvationC);
    r.get("urgent_recompute", s.balancing.urgentRecompute);
    r.get("staleness", s.balancing.staleness);
    r.get("eager_pickup", s.balancing.eagerPickup);
    r.get("penalty_per_received", s.balancing.penaltyPerReceived);
    r.get("step_overhead", s.balancing.stepOverhead);
    r.finish();
  }
  top.finish();
  return s;
}

std::pair<int, int> lineColumn(const std::string& text, std::size_t byte) {
  int line = 1;
  int column = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

void collectLeaves(const Json& node, const std::string& prefix,
                   std::vector<std::string>& paths) {
  for (const auto& [key, value] : node.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      collectLeaves(value, path, paths);
    } else {
      paths.push_back(path);
    }
  }
}

}  // namespace

Scenario parseScenario(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = lineColumn(text, e.byte);
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ScenarioError(what, line, column);
  }
  return fromJson(root);
}

Scenario loadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parseScenario(buffer.str());
}

std::string serializeScenario(const Scenario& scenario) {
  return toJson(scenario).dump(2) + "\n";
}

Scenario applyOverrides(const Scenario& scenario, const std::vector<std::string>& assignments) {
  Json root = toJson(scenario);
  std::vector<std::string> leaves;
  collectLeaves(root, "", leaves);
  for (const std::string& assignment : assignments) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ScenarioError("override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    std::string path;
    if (std::find(leaves.begin(), leaves.end(), key) != leaves.end()) {
      path = key;
    } else {
      for (const std::string& leaf : leaves) {
        const auto dot = leaf.rfind('.');
        if (leaf.substr(dot == std::string::npos ? 0 : dot + 1) != key) continue;
        if (!path.empty()) throw ScenarioError("override key '" + key + "' is ambiguous");
        path = leaf;
      }
    }
    if (path.empty()) throw ScenarioError("override key '" + key + "' is not a scenario key");

    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    Json* node = &root;
    std::size_t start = 0;
    for (auto dot = path.find('.'); dot != std::string::npos; dot = path.find('.', start)) {
      node = &(*node)[path.substr(start, dot - start)];
      start = dot + 1;
    }
    (*node)[path.substr(start)] = value;
  }
  return fromJson(root);
}

std::vector<std::string> validateScenario(const Scenario& s) {
  std::vector<std::string> out;
  auto fail = [&out](std::string msg) { out.push_back(std::move(msg)); };
  const int n = s.cluster.nRanks;
  if (s.steps <= 0) fail("steps must be positive");
  if (n <= 0) fail("cluster.ranks must be positive");
  if (s.cluster.coresPerRank <= 0) fail("cluster.cores_per_rank must be positive");
  if (!s.cluster.coreSpeed.empty()) {
    if (static_cast<int>(s.cluster.coreSpeed.size()) != n) {
      fail("cluster.core_speed needs one entry per rank");
    }
    for (double v : s.cluster.coreSpeed) {
      if (!(v > 0.0)) fail("cluster.core_speed entries must be positive");
    }
  }
  if (!(s.cluster.speedJitter >= 0.0 && s.cluster.speedJitter < 1.0)) {
    fail("cluster.speed_jitter must lie in [0,1)");
  }
  if (!(s.cluster.network.latency >= 0.0)) fail("cluster.latency must be non-negative");
  if (!(s.cluster.network.bandwidth > 0.0)) fail("cluster.bandwidth must be positive");

  const WorkloadParams& w = s.workload;
  if (!(w.taskCost > 0.0)) fail("workload.task_cost must be positive");
  if (w.inputBytes < 0.0 || w.outputBytes < 0.0) fail("workload payload sizes must be >= 0");
  if (!(w.offloadableFraction >= 0.0 && w.offloadableFraction <= 1.0)) {
    fail("workload.offloadable_fraction must lie in [0,1]");
  }
  switch (w.kind) {
    case WorkloadKind::Regular:
      if (w.totalTasks < 0) fail("workload.total_tasks must be non-negative");
      break;
    case WorkloadKind::StaticAmr:
    case WorkloadKind::DynamicAmr:
      if (w.minCount < 0 || w.maxCount < w.minCount) {
        fail("workload.min_count/max_count must satisfy 0 <= min <= max");
      }
      if (w.kind == WorkloadKind::DynamicAmr) {
        if (w.driftPeriod <= 0) fail("workload.drift_period must be positive");
        if (w.driftAmplitude < 0.0 || w.driftAmplitude >= 1.0) {
          fail("workload.drift_amplitude must lie in [0,1)");
        }
        if (w.remeshPeriod < 0) fail("workload.remesh_period must be non-negative");
      }
      break;
    case WorkloadKind::Explicit:
      if (!w.perStepCounts.empty()) {
        for (int step = 1; step <= s.steps; ++step) {
          if (static_cast<std::size_t>(step) > w.perStepCounts.size()) {
            fail("workload missing for step " + std::to_string(step));
            continue;
          }
          const auto& row = w.perStepCounts[static_cast<std::size_t>(step - 1)];
          if (static_cast<int>(row.size()) != n) {
            fail("workload for step " + std::to_string(step) + " needs one count per rank");
          }
          for (int c : row) {
            if (c < 0) fail("workload for step " + std::to_string(step) + " has a negative count");
          }
        }
      } else if (static_cast<int>(w.counts.size()) != n) {
        fail("workload.counts needs one count per rank");
      } else {
        for (int c : w.counts) {
          if (c < 0) fail("workload.counts must be non-negative");
        }
      }
      break;
  }

  for (std::size_t i = 0; i < s.disturbances.size(); ++i) {
    const Disturbance& d = s.disturbances[i];
    const std::string at = "disturbances[" + std::to_string(i) + "]";
    if (d.rank < 0 || d.rank >= n) fail(at + ".rank is out of range");
    if (d.kind == Disturbance::Kind::Delay) {
      if (d.period <= 0) fail(at + ".period must be positive");
      if (d.offset < 0 || (d.period > 0 && d.offset >= d.period)) {
        fail(at + ".offset must lie in [0, period)");
      }
      if (d.delay < 0.0) fail(at + ".delay must be non-negative");
    } else {
      if (!(d.speedFactor > 0.0)) fail(at + ".speed_factor must be positive");
      if (d.firstStep > d.lastStep) fail(at + ".first_step must not exceed last_step");
    }
  }

  const BalancingParams& b = s.balancing;
  if (!(b.omegaAvg > 0.0 && b.omegaAvg <= 1.0)) fail("balancing.omega_avg must lie in (0,1]");
  if (b.window <= 0) fail("balancing.window must be positive");
  if (!(b.omegaDiff >= DiffusionState::kMinOmega && b.omegaDiff <= DiffusionState::kMaxOmega)) {
    fail("balancing.omega_diff must lie in [0.1,1]");
  }
  if (!(b.omegaReinf > 0.0 && b.omegaReinf <= 1.0)) {
    fail("balancing.omega_reinf must lie in (0,1]");
  }
  if (b.staleness < 1) fail("balancing.staleness must be at least 1");
  if (b.stepOverhead < 0.0) fail("balancing.step_overhead must be non-negative");
  return out;
}

std::filesystem::path bundledScenarioDir() { return REACTIVE_SCENARIO_DIR; }

std::filesystem::path resolveScenario(const std::string& nameOrPath) {
  std::filesystem::path direct(nameOrPath);
  if (std::filesystem::exists(direct)) return direct;
  std::filesystem::path bundled = bundledScenarioDir() / (nameOrPath + ".json");
  if (std::filesystem::exists(bundled)) return bundled;
  return direct;
}

}  // namespace reactive
