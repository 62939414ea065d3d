#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dvfinv/error.hpp"
#include "dvfinv/stats.hpp"
#include "oracles.hpp"

using namespace dvfinv;

TEST_CASE("exact percentile of 1..100") {
  std::vector<double> xs(100);
  std::iota(xs.begin(), xs.end(), 1.0);
  std::shuffle(xs.begin(), xs.end(), std::mt19937_64(4));
  CHECK(percentile(xs, 50.0, PercentileMode::Exact) == 51.0);
  CHECK(percentile(xs, 98.0, PercentileMode::Exact) == 99.0);
  CHECK(percentile(xs, 0.5, PercentileMode::Exact) == 1.0);
  CHECK_THROWS_AS(percentile(xs, 0.0, PercentileMode::Exact), Error);
  CHECK_THROWS_AS(percentile(xs, 100.0, PercentileMode::Exact), Error);
  CHECK(percentile(xs, 99.5, PercentileMode::Exact) == 100.0);
}

TEST_CASE("constant samples give the constant in both modes") {
  const std::vector<double> xs(37, 2.5);
  for (double b : {2.0, 50.0, 98.0}) {
    CHECK(percentile(xs, b, PercentileMode::Exact) == 2.5);
    CHECK(percentile(xs, b, PercentileMode::Histogram) == 2.5);
  }
}

TEST_CASE("exact mode equals a brute-force scan; histogram within one bin") {
  std::mt19937_64 rng(12);
  for (int f = 0; f < 30; ++f) {
    std::vector<double> xs(200 + f * 13);
    std::gamma_distribution<double> d(0.5 + f * 0.1, 2.0);
    for (auto& x : xs) x = f % 3 ? d(rng) : std::floor(d(rng));
    const double bin = (*std::max_element(xs.begin(), xs.end()) - *std::min_element(xs.begin(), xs.end())) /
                       kDefaultHistogramBins;
    for (double b : {1.0, 2.0, 33.3, 50.0, 90.0, 98.0, 99.9}) {
      const double exact = percentile(xs, b, PercentileMode::Exact);
      CHECK(exact == oracle::percentile_scan(xs, b));
      CHECK(std::abs(percentile(xs, b, PercentileMode::Histogram) - exact) <= bin * (1 + 1e-9));
    }
  }
}

TEST_CASE("percentile argument checks") {
  const std::vector<double> empty;
  CHECK_THROWS_AS(percentile(empty, 50.0), Error);
  const std::vector<double> xs{1.0, 2.0};
  CHECK_THROWS_AS(percentile(xs, 100.0), Error);
  CHECK_THROWS_AS(percentile(xs, -1.0), Error);
}

TEST_CASE("field summaries respect validity, domain and complement") {
  const auto g = GridGeometry::make(2, {10, 10, 1}, {1, 1, 1}, {0, 0, 0});
  ScalarField f(g);
  for (std::size_t l = 0; l < g.size(); ++l) f.values[l] = static_cast<double>(l + 1);
  f.valid[0] = 0;
  DomainMask d(g, true);
  d.inside[99] = 0;
  const PercentileSummary s = summarize(f, &d, {50.0}, PercentileMode::Exact);
  CHECK(s.count == 98);
  CHECK(s.invalid_fraction == doctest::Approx(1.0 / 99.0));
  CHECK(s.values[0] == 51.0);
  const PercentileSummary c = summarize(f, &d, {98.0}, PercentileMode::Exact, true);
  CHECK(c.values[0] == percentile(gather(f, &d), 2.0, PercentileMode::Exact));

  ScalarField none(g, 0.0, false);
  CHECK_THROWS_AS(summarize(none), Error);
}
