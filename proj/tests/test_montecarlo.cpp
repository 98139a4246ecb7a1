#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "tvdar/montecarlo.hpp"
#include "tvdar/stability.hpp"

using namespace tvdar;

TEST_SUITE("montecarlo") {

TEST_CASE("kde symmetry, normalization and validation") {
  auto sym = kde({-1.0, 1.0});
  for (std::size_t i = 0; i < sym.grid.size(); ++i) {
    std::size_t j = sym.grid.size() - 1 - i;
    CHECK(std::fabs(sym.density[i] - sym.density[j]) <= 1e-12);
  }
  CHECK(sym.trapezoid_integral() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sym.bandwidth > 0.0);
  CHECK(sym.grid.front() < -1.0);
  CHECK(sym.grid.back() > 1.0);

  auto normal = kde(draw_noise({NoiseKind::gaussian_standard}, 10000, 131));
  CHECK(std::fabs(normal.mode()) <= 0.05);
  CHECK(normal.trapezoid_integral() == doctest::Approx(1.0).epsilon(0.02));

  CHECK_THROWS_AS(kde({1.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(kde({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(kde({1.0, 2.0}, 0.0), std::invalid_argument);
}

TEST_CASE("silverman bandwidth formula") {
  auto samples = draw_noise({NoiseKind::gaussian_standard}, 4000, 137);
  auto d = kde(samples);
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  double sd = std::sqrt(oracle::variance(sorted));
  auto q = [&](double p) {
    double h = p * (sorted.size() - 1.0);
    std::size_t lo = static_cast<std::size_t>(h);
    return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
  };
  double iqr = q(0.75) - q(0.25);
  double expect = 0.9 * std::min(sd, iqr / 1.34) *
                  std::pow(static_cast<double>(samples.size()), -0.2);
  CHECK(d.bandwidth == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("experiment is reproducible and thread-count invariant") {
  ExperimentConfig config;
  config.theta0 = DarParams(0.7, 0.01, 0.5);
  config.T_values = {50};
  config.reps = 120;
  config.seed = 99;
  auto a = run_estimator_density_experiment(config);
  auto b = run_estimator_density_experiment(config);
  config.threads = 4;
  auto c = run_estimator_density_experiment(config);
  const auto& sa = a.densities.at(50).at(Target::phi).samples;
  const auto& sb = b.densities.at(50).at(Target::phi).samples;
  const auto& sc = c.densities.at(50).at(Target::phi).samples;
  CHECK(sa == sb);
  CHECK(sa == sc);
  CHECK(a.failed_reps.at(50) <= 2);
}

TEST_CASE("small experiment lands near the configured truth") {
  ExperimentConfig config;
  config.theta0 = DarParams(0.7, 0.01, 0.5);
  config.T_values = {100};
  config.reps = 300;
  config.seed = 7;
  config.threads = 2;
  auto result = run_estimator_density_experiment(config);
  const auto& per_target = result.densities.at(100);
  CHECK(std::fabs(per_target.at(Target::phi).mode() - 0.7) <= 0.1);
  CHECK(std::fabs(per_target.at(Target::xi).mode() - 0.99) <= 0.1);
  CHECK(oracle::mean(per_target.at(Target::lambda2).samples) < 0.0);
  CHECK_FALSE(result.flagged);
}

TEST_CASE("lyapunov surface structure") {
  std::vector<double> phis;
  for (int i = -5; i <= 5; ++i) phis.push_back(0.2 * i);
  std::vector<double> alphas;
  for (int j = 0; j <= 10; ++j) alphas.push_back(0.1 * j);
  auto surface = lyapunov_surface(phis, alphas, {NoiseKind::uniform_pm1});

  // (phi, alpha) = (0, 0) is undefined; the rest of the alpha = 0 column is
  // ln|phi|.
  CHECK(std::isnan(surface[5][0]));
  CHECK(surface[8][0] == doctest::Approx(std::log(0.6)).epsilon(1e-12));

  // Even in phi.
  for (std::size_t i = 0; i < phis.size(); ++i) {
    for (std::size_t j = 1; j < alphas.size(); ++j) {
      CHECK(surface[i][j] == surface[phis.size() - 1 - i][j]);
    }
  }

  // lambda(0.6, 0.3) < 0 for uniform noise.
  CHECK(surface[8][3] < 0.0);

  // Monotone in |phi| on |phi| >= sqrt(alpha), fixed alpha.
  for (std::size_t j = 1; j < alphas.size(); ++j) {
    double s = std::sqrt(alphas[j]);
    double prev = -1e300;
    for (std::size_t i = 5; i < phis.size(); ++i) {
      if (phis[i] < s) continue;
      CHECK(surface[i][j] >= prev);
      prev = surface[i][j];
    }
  }
}

TEST_CASE("surface quadrature route matches the closed form") {
  // Same grid, but forcing the quadrature path via the standardized uniform
  // is a different distribution; instead check per-cell against the
  // closed form using the uniform_pm1 analytic values vs direct quadrature.
  std::vector<double> phis{-1.0, -0.4, 0.0, 0.2, 0.8, 1.0};
  std::vector<double> alphas{0.1, 0.5, 1.0};
  for (double phi : phis) {
    for (double alpha : alphas) {
      double closed = lyapunov_uniform(phi, alpha);
      double quad = lyapunov_quadrature(phi, alpha, {NoiseKind::uniform_pm1});
      CHECK(std::fabs(closed - quad) <= 1e-6);
    }
  }
}

TEST_CASE("target names round-trip") {
  for (Target t : all_targets()) {
    CHECK(target_from_name(target_name(t)) == t);
  }
  CHECK_THROWS_AS(target_from_name("nope"), std::invalid_argument);
}

}  // TEST_SUITE
