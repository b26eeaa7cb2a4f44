#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "reactive/balancer.hpp"

using namespace reactive;

namespace {

void checkPlan(const std::vector<int>& counts) {
  const int n = static_cast<int>(counts.size());
  const auto plan = ccpPartition(counts, n);
  REQUIRE(plan.size() == counts.size());
  for (int s = 0; s < n; ++s) {
    int sent = 0;
    for (const auto& [target, k] : plan[s]) {
      CHECK(target != s);
      CHECK(k > 0);
      sent += k;
    }
    CHECK(sent <= counts[s]);
  }
  const auto load = applyPartition(counts, plan);
  const long long total = std::accumulate(counts.begin(), counts.end(), 0LL);
  CHECK(std::accumulate(load.begin(), load.end(), 0LL) == total);
  const auto [lo, hi] = std::minmax_element(load.begin(), load.end());
  CHECK(*hi - *lo <= 1);
  CHECK(*hi == oracle::bruteBottleneck(total, n));
}

}  // namespace

TEST_CASE("ccpPartition examples") {
  const std::vector<int> skew{729, 512, 512, 512, 512, 512, 512, 512};
  for (int load : applyPartition(skew, ccpPartition(skew, 8))) {
    CHECK((load == 539 || load == 540));
  }
  for (const QuotaMap& q : ccpPartition({7, 7, 7}, 3)) CHECK(q.empty());
  const auto plan = ccpPartition({4, 0}, 2);
  CHECK(plan[0] == QuotaMap{{1, 2}});
  CHECK(plan[1].empty());
}

TEST_CASE("ccpPartition rejects bad input") {
  CHECK_THROWS_AS(ccpPartition({}, 0), std::invalid_argument);
  CHECK_THROWS_AS(ccpPartition({1, 2}, 3), std::invalid_argument);
  CHECK_THROWS_AS(ccpPartition({1, -2}, 2), std::invalid_argument);
}

TEST_CASE("ccpPartition on small random instances") {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    const int n = std::uniform_int_distribution<int>(1, 5)(rng);
    std::vector<int> counts(static_cast<std::size_t>(n));
    for (int& c : counts) c = std::uniform_int_distribution<int>(0, 6)(rng);
    checkPlan(counts);
  }
}
