#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "reactive/scenario.hpp"
#include "reactive/simulator.hpp"
#include "reactive/stats.hpp"
#include "reactive/trace.hpp"

using namespace reactive;

namespace {

EventLog smallRun(BalancingMode mode, int steps) {
  Scenario sc;
  sc.name = "trace";
  sc.steps = steps;
  sc.cluster.nRanks = 4;
  sc.cluster.coresPerRank = 2;
  sc.cluster.speedJitter = 0.05;
  sc.workload.kind = WorkloadKind::Explicit;
  sc.workload.counts = {40, 40, 120, 40};
  sc.workload.inputBytes = 4096;
  sc.workload.outputBytes = 4096;
  sc.balancing.mode = mode;
  return runSimulation(sc);
}

int countLines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

std::size_t countOf(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("one CSV row per step and rank") {
  EventLog log = smallRun(BalancingMode::Off, 2);
  log.nRanks = 4;
  CHECK(countLines(toCsv(log)) == 1 + 2 * 4);
  EventLog tiny = smallRun(BalancingMode::Off, 2);
  for (StepRecord& s : tiny.steps) s.perRank.resize(2);
  CHECK(countLines(toCsv(tiny)) == 1 + 4);
}

TEST_CASE("balancing off offloads nothing") {
  const std::string csv = toCsv(smallRun(BalancingMode::Off, 3));
  for (const StepRecord& s : parseCsv(csv)) {
    for (const RankStepRecord& p : s.perRank) CHECK(p.tasksOffloadedTo.empty());
  }
}

TEST_CASE("CSV round-trip restores every field") {
  const EventLog log = smallRun(BalancingMode::Diffusion, 12);
  const auto parsed = parseCsv(toCsv(log));
  REQUIRE(parsed.size() == log.steps.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CAPTURE(i);
    CHECK(parsed[i] == log.steps[i]);
  }
  CHECK(toCsv(EventLog{log.scenario, log.mode, log.nRanks, parsed}) == toCsv(log));
}

TEST_CASE("malformed traces are rejected") {
  CHECK_THROWS_AS(parseCsv(""), TraceError);
  CHECK_THROWS_AS(parseCsv("a,b\n"), TraceError);
  std::string csv = toCsv(smallRun(BalancingMode::Off, 1));
  csv += "1,9\n";
  CHECK_THROWS_AS(parseCsv(csv), TraceError);
}

TEST_CASE("quantize keeps nine significant digits") {
  CHECK(quantize(1.0 / 3.0) == 0.333333333);
  CHECK(quantize(quantize(2.0 / 3.0)) == quantize(2.0 / 3.0));
}

TEST_CASE("star wait graph in DOT") {
  StepRecord r;
  r.step = 4;
  r.perRank.resize(5);
  r.criticalRank = 2;
  r.optimalVictim = 0;
  for (RankId i : {0, 1, 3, 4}) r.waitEdges.push_back({i, 2, 0.5});
  const std::string dot = waitGraphDot(r);
  CHECK(countOf(dot, "-> 2 [color=red") == 4);
  CHECK(countOf(dot, "color=black") == 0);
  CHECK(countOf(dot, "[label=") == 5);
  CHECK(countOf(dot, "critical=true") == 1);
  CHECK(countOf(dot, "victim=true") == 1);
  CHECK(dot.find("2 [label=\"2\", critical=true") != std::string::npos);
  CHECK(dot.find("0 [label=\"0\", victim=true") != std::string::npos);
}

TEST_CASE("offload edges show sent over allowed") {
  StepRecord r;
  r.step = 1;
  r.perRank.resize(2);
  r.perRank[0].tasksOffloadedTo = {{1, 3}};
  r.perRank[0].quotaAllowed = {{1, 5}};
  CHECK(waitGraphDot(r).find("0 -> 1 [color=black, label=\"3/5\"]") != std::string::npos);
}

TEST_CASE("graph node count equals rank count") {
  const EventLog log = smallRun(BalancingMode::Diffusion, 5);
  for (const StepRecord& s : log.steps) {
    CHECK(countOf(waitGraphDot(s), "[label=\"") == 4);
  }
}

TEST_CASE("exports write files and fail on bad paths") {
  const auto dir = std::filesystem::temp_directory_path() / "reactive_trace_test";
  std::filesystem::create_directories(dir);
  const EventLog log = smallRun(BalancingMode::Off, 2);
  exportCsv(log, dir / "log.csv");
  std::ifstream in(dir / "log.csv");
  std::stringstream buffer;
  buffer << in.rdbuf();
  CHECK(buffer.str() == toCsv(log));
  exportWaitGraph(log.steps[0], dir / "g.dot");
  CHECK(std::filesystem::exists(dir / "g.dot"));
  CHECK_THROWS_AS(exportCsv(log, dir / "missing" / "x.csv"), TraceError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("gliding average series") {
  const std::vector<double> flat(10, 3.0);
  for (double v : glidingAverageSeries(flat, 0.9, 22)) CHECK(v == doctest::Approx(3.0));

  std::vector<double> spike(8, 0.0);
  spike[0] = 1.0;
  const auto s = glidingAverageSeries(spike, 0.5, 22);
  for (std::size_t k = 1; k < s.size(); ++k) {
    double norm = 0.0;
    for (std::size_t l = 0; l <= k; ++l) norm += std::pow(0.5, static_cast<double>(l));
    CHECK(s[k] == doctest::Approx(std::pow(0.5, static_cast<double>(k)) / norm));
  }

  const std::vector<double> ramp{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto mean = glidingAverageSeries(ramp, 1.0, 3);
  CHECK(mean[4] == doctest::Approx(4.0));
  CHECK(mean[1] == doctest::Approx(1.5));
  CHECK_THROWS_AS(glidingAverageSeries(std::vector<double>{}, 0.9, 22), StatisticError);
}
