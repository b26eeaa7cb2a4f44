#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "reactive/stats.hpp"

using namespace reactive;

namespace {

double directAverage(const std::vector<double>& w, double decay) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    num += std::pow(decay, static_cast<double>(l)) * w[l];
    den += std::pow(decay, static_cast<double>(l));
  }
  return num / den;
}

}  // namespace

TEST_CASE("movingAverage examples") {
  CHECK(movingAverage(std::vector<double>{2.0}, 0.9) == doctest::Approx(2.0));
  CHECK(movingAverage(std::vector<double>{1.0, 1.0, 1.0}, 0.9) == doctest::Approx(1.0));
  CHECK(movingAverage(std::vector<double>{2.0, 1.0}, 0.9) == doctest::Approx(2.9 / 1.9));
  CHECK_THROWS_AS(movingAverage(std::vector<double>{}, 0.9), StatisticError);
  CHECK_THROWS_AS(movingAverage(std::vector<double>{1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("movingAverage matches direct summation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> sample(-5.0, 5.0);
  std::uniform_real_distribution<double> decay(0.05, 1.0);
  std::uniform_int_distribution<int> len(1, 30);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> w(static_cast<std::size_t>(len(rng)));
    for (double& x : w) x = sample(rng);
    const double d = decay(rng);
    CHECK(movingAverage(w, d) == doctest::Approx(directAverage(w, d)).epsilon(1e-12));
  }
}

TEST_CASE("MovingAverage keeps the newest samples") {
  MovingAverage avg(0.9, 3);
  CHECK(avg.empty());
  CHECK_THROWS_AS((void)avg.value(), StatisticError);
  for (double x : {1.0, 2.0, 3.0, 4.0}) avg.push(x);
  REQUIRE(avg.size() == 3);
  CHECK(avg.window().front() == 4.0);
  CHECK(avg.window().back() == 2.0);
  CHECK(avg.value() == doctest::Approx(directAverage({4.0, 3.0, 2.0}, 0.9)));
}

TEST_CASE("default window drops below ten percent weight") {
  CHECK(std::pow(kDefaultAverageDecay, kDefaultWindowCapacity) < 0.1);
  CHECK(std::pow(kDefaultAverageDecay, kDefaultWindowCapacity - 1) >= 0.1);
}

TEST_CASE("reducedWaitTime examples") {
  CHECK(reducedWaitTime(1.0, 10, 0.05, 0, 0.0) == doctest::Approx(0.5));
  CHECK(reducedWaitTime(0.2, 10, 0.05, 0, 0.0) == 0.0);
  CHECK(reducedWaitTime(1.0, 10, 0.05, 4, 0.05) == doctest::Approx(0.3));
}

TEST_CASE("calibrationThreshold examples") {
  CHECK(calibrationThreshold(std::vector<double>{0.0, 1.0}) == doctest::Approx(0.05));
  CHECK(calibrationThreshold(std::vector<double>{0.3, 0.3, 0.3}) == doctest::Approx(0.3));
  CHECK(calibrationThreshold(std::vector<double>{0.1, 0.2, 0.9}) == doctest::Approx(0.14));
  CHECK_THROWS_AS(calibrationThreshold(std::vector<double>{}), StatisticError);
}

TEST_CASE("RankStatistics") {
  RankStatistics s(2);
  CHECK(s.waitToward(1) == 0.0);
  s.recordWait(2, 5.0);
  CHECK(s.waits().empty());
  s.recordWait(1, 1.0);
  s.recordWait(1, 2.0);
  CHECK(s.waitToward(1) == doctest::Approx(2.9 / 1.9));
  CHECK_FALSE(s.hasTaskCost());
  CHECK_THROWS_AS((void)s.taskCost(), StatisticError);
  s.recordTaskCost(0.01);
  CHECK(s.taskCost() == doctest::Approx(0.01));
}
