#include <doctest.h>

#include <algorithm>

#include "reactive/scenario.hpp"

using namespace reactive;

namespace {

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("absent keys keep their defaults") {
  const Scenario s = parseScenario(R"({"steps": 5, "cluster": {"ranks": 3}})");
  CHECK(s.steps == 5);
  CHECK(s.cluster.nRanks == 3);
  CHECK(s.cluster.coresPerRank == 1);
  CHECK((s.balancing.mode == BalancingMode::Diffusion));
  CHECK(s.balancing.window == 22);
  CHECK(s.balancing.omegaAvg == doctest::Approx(0.9));
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parseScenario("{\n  \"steps\": 5,\n  \"cluster\": {\"ranks\": }\n}");
    FAIL("expected a parse error");
  } catch (const ScenarioError& e) {
    REQUIRE(e.line().has_value());
    CHECK(*e.line() == 3);
    REQUIRE(e.column().has_value());
    CHECK(*e.column() == 24);
  }
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(parseScenario(R"({"stepz": 5})"), ScenarioError);
  CHECK_THROWS_AS(parseScenario(R"({"cluster": {"ranks": "four"}})"), ScenarioError);
  CHECK_THROWS_AS(parseScenario(R"({"balancing": {"mode": "fast"}})"), ScenarioError);
  CHECK_THROWS_AS(parseScenario(R"({"workload": {"kind": "fractal"}})"), ScenarioError);
  CHECK_THROWS_AS(parseScenario(R"({"disturbances": [{"kind": "storm"}]})"), ScenarioError);
}

TEST_CASE("canonical serialization round-trips") {
  Scenario s;
  s.name = "rt";
  s.steps = 7;
  s.cluster.nRanks = 2;
  s.cluster.coreSpeed = {1.0, 0.5};
  s.workload.kind = WorkloadKind::Explicit;
  s.workload.perStepCounts = {{1, 2}, {3, 4}};
  Disturbance d;
  d.kind = Disturbance::Kind::Slowdown;
  d.rank = 1;
  d.speedFactor = 0.25;
  s.disturbances.push_back(d);
  s.balancing.mode = BalancingMode::CcpDiffusion;
  s.balancing.reinforce = true;
  const std::string text = serializeScenario(s);
  CHECK(serializeScenario(parseScenario(text)) == text);
}

TEST_CASE("overrides by leaf name and dotted path") {
  Scenario s;
  s.cluster.nRanks = 4;
  const Scenario o = applyOverrides(
      s, {"omega_reinf=0.5", "balancing.reinforce=true", "mode=ccp", "cluster.seed=9"});
  CHECK(o.balancing.omegaReinf == doctest::Approx(0.5));
  CHECK(o.balancing.reinforce);
  CHECK((o.balancing.mode == BalancingMode::Ccp));
  CHECK(o.cluster.seed == 9);
  CHECK_THROWS_AS(applyOverrides(s, {"nonsense=1"}), ScenarioError);
  CHECK_THROWS_AS(applyOverrides(s, {"steps"}), ScenarioError);
}

TEST_CASE("validation lists violations") {
  Scenario s;
  s.cluster.nRanks = 0;
  CHECK(mentions(validateScenario(s), "cluster.ranks"));

  Scenario missing;
  missing.steps = 3;
  missing.cluster.nRanks = 2;
  missing.workload.kind = WorkloadKind::Explicit;
  missing.workload.perStepCounts = {{1, 1}, {2, 2}};
  CHECK(mentions(validateScenario(missing), "workload missing for step 3"));

  Scenario omega;
  omega.balancing.omegaDiff = 0.0;
  omega.balancing.staleness = 0;
  const auto problems = validateScenario(omega);
  CHECK(mentions(problems, "omega_diff"));
  CHECK(mentions(problems, "staleness"));
}

TEST_CASE("bundled scenarios are valid") {
  for (const char* name : {"showcase8", "balanced28", "reinforce14", "delay28", "dynamicAMR28"}) {
    CAPTURE(name);
    const Scenario s = loadScenario(resolveScenario(name));
    CHECK(s.name == name);
    CHECK(validateScenario(s).empty());
  }
}
