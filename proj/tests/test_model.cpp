#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "tvdar/model.hpp"

using namespace tvdar;

namespace {
const NoiseDistribution kGauss{NoiseKind::gaussian_standard};
const NoiseDistribution kUnif{NoiseKind::uniform_pm1};
const NoiseDistribution kUnifStd{NoiseKind::uniform_standardized};
}  // namespace

TEST_SUITE("model") {

TEST_CASE("draw_noise determinism and support") {
  auto a = draw_noise(kGauss, 1000, 99);
  auto b = draw_noise(kGauss, 1000, 99);
  CHECK(a == b);
  auto c = draw_noise(kGauss, 1000, 100);
  CHECK(a != c);

  for (double v : draw_noise(kUnif, 5000, 3)) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS_AS(draw_noise(kGauss, 0, 1), std::invalid_argument);
}

TEST_CASE("draw_noise moments") {
  auto g = draw_noise(kGauss, 1000000, 12345);
  CHECK(std::fabs(oracle::mean(g)) <= 0.004);          // 3 sigma / sqrt(n)
  CHECK(std::fabs(oracle::variance(g) - 1.0) <= 0.01);

  auto u = draw_noise(kUnif, 1000000, 54321);
  CHECK(std::fabs(oracle::mean(u)) <= 0.003);
  CHECK(std::fabs(oracle::variance(u) - 1.0 / 3.0) <= 0.01);

  auto s = draw_noise(kUnifStd, 1000000, 11111);
  CHECK(std::fabs(oracle::variance(s) - 1.0) <= 0.01);
}

TEST_CASE("noise densities integrate to one with unit variance where claimed") {
  for (NoiseDistribution d : {kGauss, kUnif, kUnifStd}) {
    auto [lo, hi] = d.quadrature_range();
    double mass = oracle::midpoint([d](double x) { return d.density(x); }, lo, hi);
    double var = oracle::midpoint([d](double x) { return x * x * d.density(x); },
                                  lo, hi);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(var == doctest::Approx(d.variance()).epsilon(1e-6));
  }
}

TEST_CASE("degenerate model reduces to scaled noise") {
  auto x = simulate_dar(DarParams(0.0, 2.5, 0.0), 100000, kGauss, 7);
  CHECK(oracle::variance(x.values) == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("alpha = 0 gives an AR(1) with matching autocorrelation") {
  auto x = simulate_dar(DarParams(0.7, 1.0, 0.0), 100000, kGauss, 11);
  CHECK(oracle::acf_at(x.values, 1) == doctest::Approx(0.7).epsilon(0.03));
}

TEST_CASE("second-order stationary variance identity") {
  // var = omega / (1 - phi^2 - alpha) when phi^2 + alpha < 1
  auto x = simulate_dar(DarParams(0.7, 0.01, 0.5), 100000, kGauss, 13);
  CHECK(oracle::variance(x.values) == doctest::Approx(1.0).epsilon(0.20));
}

TEST_CASE("reproducibility and noise-negation symmetry") {
  DarParams p(0.6, 0.5, 0.2);
  auto x1 = simulate_dar(p, 500, kGauss, 77, 200);
  auto x2 = simulate_dar(p, 500, kGauss, 77, 200);
  CHECK(x1.values == x2.values);

  auto noise = draw_noise(kGauss, 700, 77);
  auto path = ParamPath::constant(p);
  auto base = simulate_path(path, noise, 500);
  CHECK(base == x1.values);
  for (double& v : noise) v = -v;
  auto flipped = simulate_path(path, noise, 500);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(flipped[i] == -base[i]);
  }
}

TEST_CASE("ARCH special case: levels white, squares correlated") {
  auto x = simulate_dar(DarParams(0.0, 1.0, 0.5), 100000, kGauss, 17);
  CHECK(std::fabs(oracle::acf_at(x.values, 1)) <= 0.02);
  std::vector<double> sq(x.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = x.values[i] * x.values[i];
  CHECK(oracle::acf_at(sq, 1) > 0.05);
}

TEST_CASE("explosive path fails loudly with the step index") {
  bool threw = false;
  try {
    simulate_dar(DarParams(3.0, 1.0, 0.0), 1000, kGauss, 5);
  } catch (const explosion_error& e) {
    threw = true;
    CHECK(e.index > 0);
  }
  CHECK(threw);
}

TEST_CASE("constant path reduces tvdar to dar bit-exactly") {
  DarParams p(0.4, 0.1, 0.3);
  auto a = simulate_dar(p, 300, kGauss, 21, 100);
  auto b = simulate_tvdar(ParamPath::constant(p), 300, kGauss, 21, 100);
  CHECK(a.values == b.values);
}

TEST_CASE("rising phi path raises late-sample persistence") {
  ParamPath path{[](double c) { return 0.2 + 0.6 * c; },
                 [](double) { return 0.01; }, [](double) { return 0.3; }};
  auto x = simulate_tvdar(path, 10000, kGauss, 23);
  std::span<const double> all(x.values);
  double early = oracle::acf_at(all.subspan(0, 2000), 1);
  double late = oracle::acf_at(all.subspan(8000, 2000), 1);
  CHECK(early < late);
}

TEST_CASE("omega step scales the variance of the second half") {
  auto omega_step = [](double c) { return c < 0.5 ? 0.01 : 0.04; };
  ParamPath path{[](double) { return 0.0; }, omega_step, [](double) { return 0.0; }};
  auto x = simulate_tvdar(path, 20000, kGauss, 29);
  std::span<const double> all(x.values);
  double v1 = oracle::variance(all.subspan(0, 10000));
  double v2 = oracle::variance(all.subspan(10000, 10000));
  CHECK(v2 / v1 == doctest::Approx(4.0).epsilon(0.30));
}

TEST_CASE("ParamPath validation and piecewise interpolation") {
  auto p = ParamPath::piecewise_linear({0.0, 0.5, 1.0}, {0.1, 0.3, 0.2},
                                       {1.0, 2.0, 1.0}, {0.0, 0.5, 0.0});
  CHECK(p.at(0.25).phi == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p.at(0.75).omega == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(p.at(0.0).alpha == 0.0);

  ParamPath bad{[](double) { return 0.1; }, [](double c) { return c - 0.5; },
                [](double) { return 0.0; }};
  CHECK_THROWS_AS(bad.at(0.25), std::invalid_argument);  // omega <= 0
  CHECK_THROWS_AS(
      ParamPath::piecewise_linear({0.5, 0.5}, {0, 0}, {1, 1}, {0, 0}),
      std::invalid_argument);
}

}  // TEST_SUITE
