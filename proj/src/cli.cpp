#include "reactive/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "reactive/scenario.hpp"
#include "reactive/simulator.hpp"
#include "reactive/trace.hpp"

namespace reactive {

namespace {

constexpr int kEarlySteps = 25;

PhaseSummary summarize(const EventLog& log) {
  PhaseSummary s;
  s.mode = log.mode;
  double early = 0.0;
  double late = 0.0;
  int nEarly = 0;
  int nLate = 0;
  for (const StepRecord& r : log.steps) {
    s.total += r.makespan;
    if (r.step <= kEarlySteps) {
      early += r.makespan;
      ++nEarly;
    } else {
      late += r.makespan;
      ++nLate;
    }
    for (const RankStepRecord& p : r.perRank) {
      s.emergencies += p.emergencies;
      s.recomputes += p.recomputes;
    }
  }
  s.earlyMean = nEarly > 0 ? early / nEarly : 0.0;
  s.lateMean = nLate > 0 ? late / nLate : 0.0;
  return s;
}

std::string fileStem(const std::string& mode) {
  std::string out = mode;
  for (char& c : out) {
    if (c == '+') c = '_';
  }
  return out;
}

std::string summaryTable(const std::string& scenario, int steps,
                         const std::vector<PhaseSummary>& rows) {
  std::ostringstream os;
  char line[160];
  os << "scenario " << scenario << ", " << steps << " steps\n";
  std::snprintf(line, sizeof line, "%-15s %14s %14s %12s %11s %10s\n", "mode", "mean 1-25",
                "mean 26-end", "total", "emergencies", "recomputes");
  os << line;
  for (const PhaseSummary& r : rows) {
    std::snprintf(line, sizeof line, "%-15s %14.6f %14.6f %12.4f %11d %10d\n", r.mode.c_str(),
                  r.earlyMean, r.lateMean, r.total, r.emergencies, r.recomputes);
    os << line;
  }
  return os.str();
}

struct RunArgs {
  std::string scenario;
  std::vector<std::string> modes;
  int steps = 0;
  std::string outDir = "out";
  std::vector<std::string> overrides;
  int jobs = 1;
  int graphEvery = 10;
  bool check = false;
};

int cmdValidate(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto file = resolveScenario(path);
  if (!std::filesystem::exists(file)) {
    err << "error: scenario file not found: " << path << "\n";
    return kExitUsage;
  }
  Scenario sc;
  try {
    sc = loadScenario(file);
  } catch (const ScenarioError& e) {
    out << file.string() << ": " << e.what() << "\n";
    return kExitInvalidScenario;
  }
  const auto problems = validateScenario(sc);
  if (problems.empty()) {
    out << "ok\n";
    return kExitOk;
  }
  for (const std::string& p : problems) out << file.string() << ": " << p << "\n";
  return kExitInvalidScenario;
}

int cmdRun(const RunArgs& args, std::ostream& out, std::ostream& err) {
  const auto file = resolveScenario(args.scenario);
  if (!std::filesystem::exists(file)) {
    err << "error: scenario file not found: " << args.scenario << "\n";
    return kExitUsage;
  }
  Scenario base;
  try {
    base = applyOverrides(loadScenario(file), args.overrides);
    if (args.steps > 0) base.steps = args.steps;
  } catch (const ScenarioError& e) {
    err << file.string() << ": " << e.what() << "\n";
    return kExitInvalidScenario;
  }
  if (const auto problems = validateScenario(base); !problems.empty()) {
    for (const std::string& p : problems) err << file.string() << ": " << p << "\n";
    return kExitInvalidScenario;
  }

  std::vector<BalancingMode> modes;
  for (const std::string& m : args.modes) {
    auto parsed = parseBalancingMode(m);
    if (!parsed) {
      err << "error: unknown mode '" << m << "'\n";
      return kExitUsage;
    }
    modes.push_back(*parsed);
  }
  if (modes.empty()) modes.push_back(base.balancing.mode);

  const std::filesystem::path outDir(args.outDir);
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec) {
    err << "error: cannot create " << outDir.string() << ": " << ec.message() << "\n";
    return kExitUsage;
  }

  std::vector<std::optional<EventLog>> logs(modes.size());
  std::vector<std::string> failures(modes.size());
  std::vector<bool> deadlocked(modes.size(), false);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < modes.size(); i = next++) {
      Scenario sc = base;
      sc.balancing.mode = modes[i];
      RunOptions options;
      options.checkInvariants = args.check;
      try {
        logs[i] = runSimulation(sc, options);
      } catch (const DeadlockError& e) {
        deadlocked[i] = true;
        failures[i] = e.what();
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(args.jobs, static_cast<int>(modes.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  int status = kExitOk;
  std::vector<PhaseSummary> rows;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (!logs[i]) {
      err << toString(modes[i]) << ": " << failures[i] << "\n";
      status = deadlocked[i] ? kExitDeadlock : kExitInvalidScenario;
      continue;
    }
    const EventLog& log = *logs[i];
    const std::string stem = fileStem(log.mode);
    try {
      exportCsv(log, outDir / (base.name + "_" + stem + ".csv"));
      if (args.graphEvery > 0) {
        const auto graphDir = outDir / "graphs" / stem;
        std::filesystem::create_directories(graphDir);
        for (const StepRecord& r : log.steps) {
          if (r.step == 1 || r.step % args.graphEvery == 0) {
            char name[32];
            std::snprintf(name, sizeof name, "step%04d.dot", r.step);
            exportWaitGraph(r, graphDir / name);
          }
        }
      }
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    rows.push_back(summarize(log));
  }
  if (!rows.empty()) {
    const std::string table = summaryTable(base.name, base.steps, rows);
    out << table;
    std::ofstream(outDir / "summary.txt") << table;
  }
  return status;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-event simulator for reactive diffusive task offloading",
               "reactive-sim"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* runCmd = app.add_subcommand("run", "Simulate a scenario and write traces");
  runCmd->add_option("scenario", run.scenario, "Scenario file or bundled name")->required();
  runCmd->add_option("--mode", run.modes, "off|ccp|diffusion|ccp+diffusion (repeatable)");
  runCmd->add_option("--steps", run.steps, "Override the number of steps");
  runCmd->add_option("--out", run.outDir, "Output directory");
  runCmd->add_option("--set", run.overrides, "key=value scenario override (repeatable)");
  runCmd->add_option("--jobs", run.jobs, "Modes simulated in parallel");
  runCmd->add_option("--graph-every", run.graphEvery, "Graph snapshot interval, 0 disables");
  runCmd->add_flag("--check", run.check, "Verify runtime invariants at every event");

  std::string validatePath;
  CLI::App* validateCmd = app.add_subcommand("validate", "Check a scenario without running");
  validateCmd->add_option("scenario", validatePath, "Scenario file or bundled name")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (*validateCmd) return cmdValidate(validatePath, out, err);
  return cmdRun(run, out, err);
}

}  // namespace reactive
