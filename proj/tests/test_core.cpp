#include <doctest.h>

#include <cmath>

#include "tvdar/core.hpp"

using namespace tvdar;

namespace {

PriceSeries make_series(std::vector<double> values) {
  std::vector<std::string> dates;
  std::string d = "2020-01-01";
  for (std::size_t i = 0; i < values.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "2020-01-%02d", static_cast<int>(i + 1));
    dates.push_back(buf);
  }
  return PriceSeries(dates, std::move(values));
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("demean_global on a constant series") {
  auto x = demean_global(make_series({1.0, 1.0, 1.0}));
  for (double v : x.values) CHECK(v == 0.0);
  CHECK(std::get<double>(x.mean_used) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("demean_global two-point mean") {
  auto x = demean_global(make_series({1.0, 1.004}));
  CHECK(x.values[0] == doctest::Approx(-0.002).epsilon(1e-12));
  CHECK(x.values[1] == doctest::Approx(0.002).epsilon(1e-12));
}

TEST_CASE("demean_global round-trips exactly for near-peg data") {
  std::vector<double> y{1.0021, 0.9987, 1.0103, 0.9932, 1.0009, 1.0044, 0.9978};
  auto series = make_series(y);
  auto x = demean_global(series);
  double m = std::get<double>(x.mean_used);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(x.values[i] + m == y[i]);  // exact: data lies within a binade of m
  }
}

TEST_CASE("demean_local constants, ramps and the full-window limit") {
  auto zeros = demean_local(make_series({2.0, 2.0, 2.0, 2.0, 2.0}), 3);
  for (double v : zeros.values) CHECK(v == 0.0);

  std::vector<double> ramp;
  for (int t = 1; t <= 9; ++t) ramp.push_back(static_cast<double>(t));
  auto x = demean_local(make_series(ramp), 2);
  CHECK(x.values[0] == 0.0);  // prefix mean is the point itself
  for (std::size_t t = 1; t < ramp.size(); ++t) {
    CHECK(x.values[t] == doctest::Approx(0.5).epsilon(1e-15));
  }

  std::vector<double> y{1.01, 0.99, 1.02, 0.97, 1.04, 1.0};
  auto local = demean_local(make_series(y), y.size());
  auto global = demean_global(make_series(y));
  CHECK(local.values.back() ==
        doctest::Approx(global.values.back()).epsilon(1e-12));
}

TEST_CASE("demean_local window validation") {
  auto series = make_series({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(demean_local(series, 1), std::invalid_argument);
  CHECK_THROWS_AS(demean_local(series, 4), std::invalid_argument);
}

TEST_CASE("DarParams invariants") {
  CHECK_THROWS_AS(DarParams(0.5, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(DarParams(0.5, -1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(DarParams(0.5, 1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(DarParams(std::nan(""), 1.0, 0.1), std::invalid_argument);
  CHECK_NOTHROW(DarParams(0.5, 1.0, 0.0));  // alpha = 0 is allowed
}

TEST_CASE("PriceSeries validation names the offending index") {
  CHECK_THROWS_AS(PriceSeries({"2020-01-01"}, {1.0}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      PriceSeries({"2020-01-02", "2020-01-01"}, {1.0, 2.0}),
      doctest::Contains("index 2"), std::invalid_argument);
  CHECK_THROWS_AS(PriceSeries({"2020-01-01", "2020-01-01"}, {1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      PriceSeries({"2020-01-01", "2020-01-02"}, {1.0, std::nan("")}),
      std::invalid_argument);
}

TEST_CASE("TimePoint range check") {
  CHECK_THROWS_AS(TimePoint(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(TimePoint(1.01), std::invalid_argument);
  CHECK(TimePoint(0.0).c == 0.0);
  CHECK(TimePoint(1.0).c == 1.0);
}

TEST_CASE("make_grid spans the requested interval") {
  auto g = make_grid(5, 0.0, 1.0);
  REQUIRE(g.size() == 5);
  CHECK(g.front().c == 0.0);
  CHECK(g.back().c == 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i - 1].c < g[i].c);
}

}  // TEST_SUITE
