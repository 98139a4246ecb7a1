#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "tvdar/estimation.hpp"
#include "tvdar/model.hpp"

using namespace tvdar;

namespace {
const NoiseDistribution kGauss{NoiseKind::gaussian_standard};
const NoiseDistribution kUnifStd{NoiseKind::uniform_standardized};
}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("qml_loglik hand values") {
  auto x0 = DemeanedSeries::from_values({0.0, 0.0});
  CHECK(qml_loglik(x0, DarParams(0.3, 1.0, 1.0)) == 0.0);
  CHECK(qml_loglik(x0, DarParams(-1.7, 1.0, 1.0)) == 0.0);

  auto x1 = DemeanedSeries::from_values({1.0, 1.0});
  CHECK(qml_loglik(x1, DarParams(1.0, 1.0, 0.0)) == 0.0);

  auto x2 = DemeanedSeries::from_values({1.0, 2.0});
  // -(1/2) ln 2 - (1/2) * 4/2
  CHECK(qml_loglik(x2, DarParams(0.0, 1.0, 1.0)) ==
        doctest::Approx(-0.5 * std::log(2.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("simulate-and-recover lands within 3 standard errors") {
  DarParams truth(0.7, 0.01, 0.5);
  auto x = simulate_dar(truth, 5000, kGauss, 314);
  auto fit = fit_dar(x);
  REQUIRE(fit.converged);
  REQUIRE(fit.cov.se_phi.has_value());
  REQUIRE(fit.cov.se_omega.has_value());
  REQUIRE(fit.cov.se_alpha.has_value());
  CHECK(std::fabs(fit.params.phi - truth.phi) <= 3.0 * *fit.cov.se_phi);
  CHECK(std::fabs(fit.params.omega - truth.omega) <= 3.0 * *fit.cov.se_omega);
  CHECK(std::fabs(fit.params.alpha - truth.alpha) <= 3.0 * *fit.cov.se_alpha);

  // Coarse grid search must not beat the optimizer.
  double best_grid = -1e300;
  for (double phi = 0.5; phi <= 0.91; phi += 0.05) {
    for (double lw = std::log(0.002); lw <= std::log(0.05); lw += 0.4) {
      for (double la = std::log(0.1); la <= std::log(1.5); la += 0.3) {
        best_grid = std::max(
            best_grid, qml_loglik(x, DarParams(phi, std::exp(lw), std::exp(la))));
      }
    }
  }
  CHECK(fit.loglik >= best_grid - 1e-9);
}

TEST_CASE("pure ARCH data keeps phi near zero") {
  auto x = simulate_dar(DarParams(0.0, 1.0, 0.5), 5000, kGauss, 2718);
  auto fit = fit_dar(x);
  REQUIRE(fit.cov.se_phi.has_value());
  CHECK(std::fabs(fit.params.phi) <= 3.0 * *fit.cov.se_phi);
}

TEST_CASE("residual identities") {
  auto x = DemeanedSeries::from_values({0.3, -0.1, 0.8, 0.2});
  auto res = residuals(x, DarParams(0.0, 1.0, 0.0));
  REQUIRE(res.values.size() == 3);
  CHECK(res.aligned_index == 2);
  CHECK(res.values[0] == -0.1);
  CHECK(res.values[1] == 0.8);
  CHECK(res.values[2] == 0.2);

  auto zeros = DemeanedSeries::from_values(std::vector<double>(50, 0.0));
  auto rz = residuals(zeros, DarParams(0.9, 0.5, 0.3));
  for (double v : rz.values) CHECK(v == 0.0);
}

TEST_CASE("residuals at the truth recover unit-variance noise") {
  DarParams truth(0.7, 0.01, 0.5);
  auto x = simulate_dar(truth, 100000, kGauss, 999);
  auto res = residuals(x, truth);
  CHECK(std::fabs(oracle::mean(res.values)) <= 3.0 / std::sqrt(100000.0));
  CHECK(oracle::variance(res.values) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("kappa estimates match the noise kurtosis") {
  DarParams truth(0.5, 1.0, 0.3);
  auto xg = simulate_dar(truth, 100000, kGauss, 404);
  CHECK(asymptotic_cov(xg, truth).kappa_hat == doctest::Approx(2.0).epsilon(0.075));

  // E eta^4 - 1 for U[-sqrt(3), sqrt(3)] via quadrature.
  double e4 = oracle::midpoint(
      [](double u) { return u * u * u * u * kUnifStd.density(u); },
      -std::sqrt(3.0), std::sqrt(3.0));
  CHECK(e4 == doctest::Approx(1.8).epsilon(1e-6));
  auto xu = simulate_dar(truth, 100000, kUnifStd, 505);
  CHECK(asymptotic_cov(xu, truth).kappa_hat ==
        doctest::Approx(e4 - 1.0).epsilon(0.125));
}

TEST_CASE("all-zero input flags the singular phi block") {
  auto zeros = DemeanedSeries::from_values(std::vector<double>(64, 0.0));
  auto cov = asymptotic_cov(zeros, DarParams(0.2, 1.0, 0.1));
  CHECK(cov.sigma_hat == 0.0);
  CHECK(cov.sigma_singular);
  CHECK_FALSE(cov.se_phi.has_value());
}

TEST_CASE("degenerate inputs produce a singular-fit error") {
  auto constant = DemeanedSeries::from_values(std::vector<double>(60, 1.5));
  CHECK_THROWS_AS(fit_dar(constant), singular_fit_error);
  auto tiny = DemeanedSeries::from_values({0.1, 0.2, 0.3});
  CHECK_THROWS_AS(fit_dar(tiny), std::invalid_argument);
}

TEST_CASE("scale equivariance of the optimum") {
  auto x = simulate_dar(DarParams(0.5, 1.0, 0.4), 2000, kGauss, 123);
  auto fit1 = fit_dar(x);
  const double k = 1000.0;
  DemeanedSeries scaled;
  scaled.values = x.values;
  for (double& v : scaled.values) v *= k;
  auto fit2 = fit_dar(scaled);
  CHECK(fit2.params.phi == doctest::Approx(fit1.params.phi).epsilon(1e-9));
  CHECK(fit2.params.alpha == doctest::Approx(fit1.params.alpha).epsilon(1e-9));
  CHECK(fit2.params.omega ==
        doctest::Approx(fit1.params.omega * k * k).epsilon(1e-9));
}

TEST_CASE("rectangular local fit equals the windowed fit") {
  auto x = simulate_dar(DarParams(0.5, 1.0, 0.3), 400, kGauss, 55);
  const std::size_t T = x.size(), n = 50;
  Bandwidth b = Bandwidth::from_window(n, T);
  LocalFitOptions opt;
  opt.warm_start = false;
  std::vector<TimePoint> grid;
  std::vector<std::size_t> origins{80, 200, 400};
  for (std::size_t t0 : origins) {
    grid.emplace_back(static_cast<double>(t0) / static_cast<double>(T));
  }
  auto lf = fit_tvdar(x, grid, {KernelKind::rectangular_asymmetric}, b, opt);
  for (std::size_t i = 0; i < origins.size(); ++i) {
    std::size_t t0 = origins[i];
    REQUIRE(lf.estimated(i));
    // The kernel window covers the n transitions ending at t0, conditioning
    // on the observation just before it, so the matching flat fit sees the
    // (n + 1)-point slice.
    std::span<const double> slice(x.values.data() + (t0 - n - 1), n + 1);
    auto wf = fit_dar(slice, opt);
    CHECK(std::fabs(lf.params_at[i]->phi - wf.params.phi) <= 1e-6);
    CHECK(std::fabs(lf.params_at[i]->omega - wf.params.omega) <= 1e-6);
    CHECK(std::fabs(lf.params_at[i]->alpha - wf.params.alpha) <= 1e-6);
    CHECK(lf.effective_n[i] == static_cast<double>(n));
  }
}

TEST_CASE("local fit tracks constant parameters within banded error") {
  DarParams truth(0.6, 0.02, 0.3);
  auto x = simulate_dar(truth, 5000, kGauss, 808);
  auto grid = make_grid(21, 0.05, 0.95);
  auto lf = fit_tvdar(x, grid, {KernelKind::epanechnikov}, Bandwidth(0.05), {});
  double worst = 0.0, max_se = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(lf.estimated(i));
    REQUIRE(lf.cov_at[i].se_phi.has_value());
    worst = std::max(worst, std::fabs(lf.params_at[i]->phi - truth.phi));
    max_se = std::max(max_se, *lf.cov_at[i].se_phi);
  }
  CHECK(worst <= 4.0 * max_se);
}

TEST_CASE("local fit recovers a rising phi trend") {
  ParamPath path{[](double c) { return 0.2 + 0.6 * c; },
                 [](double) { return 0.01; }, [](double) { return 0.3; }};
  auto x = simulate_tvdar(path, 10000, kGauss, 606);
  auto grid = make_grid(25, 0.1, 0.9);
  auto lf = fit_tvdar(x, grid, {KernelKind::epanechnikov}, Bandwidth(0.1), {});
  std::vector<double> cs, phis;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(lf.estimated(i));
    cs.push_back(grid[i].c);
    phis.push_back(lf.params_at[i]->phi);
  }
  double slope = oracle::ls_slope(cs, phis);
  CHECK(slope > 0.0);
  CHECK(slope == doctest::Approx(0.6).epsilon(0.30));
}

TEST_CASE("band half-width: normal quantile and bandwidth scaling") {
  KernelSpec epan{KernelKind::epanechnikov};
  double half95 = local_band_half_width(0.95, epan, 2.0, 1000, Bandwidth(0.1));
  double z = half95 / std::sqrt(1.2 * 2.0 / (1000 * 0.1));
  CHECK(z == doctest::Approx(1.959964).epsilon(1e-4));

  // Halving b inflates the width by sqrt(2), variance estimates held fixed.
  double half_b = local_band_half_width(0.95, epan, 2.0, 1000, Bandwidth(0.05));
  CHECK(half_b / half95 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("pointwise band coverage near nominal") {
  DarParams truth(0.5, 0.5, 0.2);
  const int reps = 500;
  int covered = 0;
  auto grid = std::vector<TimePoint>{TimePoint(0.5)};
  for (int r = 0; r < reps; ++r) {
    auto x = simulate_dar(truth, 1500, kGauss, 9000 + r);
    auto lf = fit_tvdar(x, grid, {KernelKind::epanechnikov}, Bandwidth(0.1), {});
    if (!lf.estimated(0) || !lf.cov_at[0].se_phi) continue;
    auto bands = local_confidence_bands(lf, 0.95);
    if (bands.phi_lo[0] <= truth.phi && truth.phi <= bands.phi_hi[0]) ++covered;
  }
  double coverage = static_cast<double>(covered) / reps;
  CHECK(coverage >= 0.90);
  CHECK(coverage <= 0.98);
}

TEST_CASE("unestimated grid points are marked, not fatal") {
  auto x = simulate_dar(DarParams(0.5, 1.0, 0.2), 500, kGauss, 42);
  // c = 0 leaves the rectangular kernel with an empty window.
  std::vector<TimePoint> grid{TimePoint(0.0), TimePoint(0.5)};
  auto lf = fit_tvdar(x, grid, {KernelKind::rectangular_asymmetric},
                      Bandwidth::from_window(50, 500), {});
  CHECK_FALSE(lf.estimated(0));
  CHECK(lf.estimated(1));
  CHECK(lf.estimated_count() == 1);
}

TEST_CASE("grid validation") {
  auto x = simulate_dar(DarParams(0.5, 1.0, 0.2), 200, kGauss, 43);
  std::vector<TimePoint> bad{TimePoint(0.5), TimePoint(0.5)};
  CHECK_THROWS_AS(
      fit_tvdar(x, bad, {KernelKind::epanechnikov}, Bandwidth(0.2), {}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      fit_tvdar(x, {}, {KernelKind::epanechnikov}, Bandwidth(0.2), {}),
      std::invalid_argument);
  CHECK_THROWS_AS(local_confidence_bands(LocalFit{}, 1.5), std::invalid_argument);
}

TEST_CASE("threaded grid evaluation matches cold sequential") {
  auto x = simulate_dar(DarParams(0.5, 1.0, 0.3), 1500, kGauss, 77);
  auto grid = make_grid(9, 0.2, 0.8);
  LocalFitOptions cold;
  cold.warm_start = false;
  LocalFitOptions threaded = cold;
  threaded.threads = 4;
  auto a = fit_tvdar(x, grid, {KernelKind::epanechnikov}, Bandwidth(0.1), cold);
  auto b = fit_tvdar(x, grid, {KernelKind::epanechnikov}, Bandwidth(0.1), threaded);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(a.estimated(i));
    REQUIRE(b.estimated(i));
    CHECK(a.params_at[i]->phi == b.params_at[i]->phi);
    CHECK(a.params_at[i]->omega == b.params_at[i]->omega);
    CHECK(a.params_at[i]->alpha == b.params_at[i]->alpha);
  }
}

}  // TEST_SUITE
