#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "reactive/cli.hpp"
#include "reactive/trace.hpp"

using namespace reactive;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = runCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("reactive_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("run compares modes") {
  const fs::path dir = scratch("modes");
  const Result r = cli({"run", "showcase8", "--mode", "off", "--mode", "diffusion", "--steps",
                        "3", "--out", dir.string(), "--graph-every", "2"});
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "showcase8_off.csv"));
  CHECK(fs::exists(dir / "showcase8_diffusion.csv"));
  CHECK(fs::exists(dir / "graphs" / "diffusion" / "step0001.dot"));
  CHECK(fs::exists(dir / "graphs" / "diffusion" / "step0002.dot"));
  CHECK_FALSE(fs::exists(dir / "graphs" / "diffusion" / "step0003.dot"));
  const std::string summary = slurp(dir / "summary.txt");
  CHECK(summary == r.out);
  CHECK(summary.find("\noff ") != std::string::npos);
  CHECK(summary.find("\ndiffusion ") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("overrides reach the omega trajectory") {
  const fs::path dir = scratch("omega");
  CHECK(cli({"run", "showcase8", "--steps", "6", "--out", dir.string(), "--graph-every", "0",
             "--set", "reinforce=true", "--set", "omega_reinf=1.0"})
            .code == kExitOk);
  bool moved = false;
  for (const StepRecord& s : parseCsv(slurp(dir / "showcase8_diffusion.csv"))) {
    for (const RankStepRecord& p : s.perRank) moved = moved || p.omegaDiff != 1.0;
  }
  CHECK(moved);
  fs::remove_all(dir);
}

TEST_CASE("same request twice gives identical outputs") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  for (const fs::path& dir : {a, b}) {
    REQUIRE(cli({"run", "showcase8", "--mode", "ccp+diffusion", "--steps", "5", "--out",
                 dir.string(), "--graph-every", "1"})
                .code == kExitOk);
  }
  CHECK(slurp(a / "showcase8_ccp_diffusion.csv") == slurp(b / "showcase8_ccp_diffusion.csv"));
  CHECK(slurp(a / "graphs/ccp_diffusion/step0005.dot") ==
        slurp(b / "graphs/ccp_diffusion/step0005.dot"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"run"}).code == kExitUsage);
  CHECK(cli({"run", "/nonexistent/scenario.json"}).code == kExitUsage);
  CHECK(cli({"run", "showcase8", "--mode", "sideways"}).code == kExitUsage);
  CHECK(cli({"run", "showcase8", "--bogus"}).code == kExitUsage);
  CHECK(cli({"validate", "/nonexistent/scenario.json"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("validate reports ok or the violations") {
  const Result ok = cli({"validate", "delay28"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out == "ok\n");

  const fs::path dir = scratch("validate");
  std::ofstream(dir / "zero.json") << R"({"cluster": {"ranks": 0}})";
  const Result zero = cli({"validate", (dir / "zero.json").string()});
  CHECK(zero.code == kExitInvalidScenario);
  CHECK(zero.out.find("cluster.ranks must be positive") != std::string::npos);

  std::ofstream(dir / "broken.json") << "{\n  \"steps\": ,\n}";
  const Result broken = cli({"validate", (dir / "broken.json").string()});
  CHECK(broken.code == kExitInvalidScenario);
  CHECK(broken.out.find("line 2") != std::string::npos);

  const Result run = cli({"run", (dir / "zero.json").string(), "--out", dir.string()});
  CHECK(run.code == kExitInvalidScenario);
  CHECK(cli({"run", "showcase8", "--set", "nope=1", "--out", dir.string()}).code ==
        kExitInvalidScenario);
  fs::remove_all(dir);
}
