#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kp/stats.hpp"
#include "oracles.hpp"

using namespace kp;

TEST_CASE("pearson pins") {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  CHECK(pearson(x, std::vector<double>{2.0, 4.0, 6.0}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(x, std::vector<double>{3.0, 2.0, 1.0}) ==
        doctest::Approx(-1.0).epsilon(1e-15));

  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> b = {2.0, 1.0, 4.0, 3.0, 5.0};
  // cov = 2.0, sd_a = sd_b = sqrt(2.5) with the same normalization.
  CHECK(pearson(a, b) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("spearman pins and definition") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> monotone = {1.0, 8.0, 27.0, 64.0, 125.0};
  CHECK(spearman(x, monotone) == doctest::Approx(1.0).epsilon(1e-15));

  const std::vector<double> y = {5.0, 6.0, 7.0, 8.0, 7.0};
  // Tied 7s share rank 3.5; pearson of the rank vectors gives 8/sqrt(95).
  CHECK(spearman(x, y) == doctest::Approx(8.0 / std::sqrt(95.0)).epsilon(1e-12));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(30), ys(30);
    for (double& v : xs) v = u(rng);
    for (double& v : ys) v = u(rng);
    CHECK(spearman(xs, ys) ==
          doctest::Approx(pearson(average_ranks(xs), average_ranks(ys)))
              .epsilon(1e-12));
  }
}

TEST_CASE("average ranks with ties") {
  const std::vector<double> xs = {10.0, 20.0, 20.0, 30.0};
  CHECK(average_ranks(xs) == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  const std::vector<double> flat = {7.0, 7.0, 7.0};
  CHECK(average_ranks(flat) == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("kendall pins") {
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  CHECK(kendall_tau_b(x, std::vector<double>{1.0, 3.0, 2.0, 4.0}) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(kendall_tau_b(x, std::vector<double>{4.0, 3.0, 2.0, 1.0}) ==
        doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(kendall_tau_b(x, x) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("kendall matches the quadratic oracle, ties included") {
  std::mt19937_64 rng(20240906);
  std::uniform_int_distribution<std::size_t> len(2, 200);
  std::uniform_int_distribution<int> coarse(0, 6);
  std::uniform_real_distribution<double> fine(0.0, 1.0);
  int undefined_seen = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = len(rng);
    std::vector<double> xs(n), ys(n);
    const bool tie_heavy = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = tie_heavy ? coarse(rng) : fine(rng);
      ys[i] = tie_heavy ? coarse(rng) : fine(rng);
    }
    try {
      const double fast = kendall_tau_b(xs, ys);
      const double slow = oracle::naive_kendall_tau_b(xs, ys);
      CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    } catch (const std::domain_error&) {
      // Both must consider it undefined.
      ++undefined_seen;
      CHECK_THROWS_AS((void)oracle::naive_kendall_tau_b(xs, ys),
                      std::domain_error);
    }
  }
  // Tie-heavy short series occasionally degenerate; most must be defined.
  CHECK(undefined_seen < 20);
}

TEST_CASE("input validation is shared across the three coefficients") {
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> shorter = {1.0, 2.0};
  const std::vector<double> with_nan = {
      1.0, std::numeric_limits<double>::quiet_NaN(), 3.0};
  const std::vector<double> constant = {5.0, 5.0, 5.0};
  const std::vector<double> single = {1.0};

  for (auto* f : {pearson, spearman, kendall_tau_b}) {
    CHECK_THROWS_AS(f(x, shorter), std::invalid_argument);
    CHECK_THROWS_AS(f(x, with_nan), std::invalid_argument);
    CHECK_THROWS_AS(f(single, single), std::invalid_argument);
    CHECK_THROWS_AS(f(x, constant), std::domain_error);
    CHECK_THROWS_AS(f(constant, x), std::domain_error);
  }
}
