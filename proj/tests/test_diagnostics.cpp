#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracle.hpp"
#include "tvdar/diagnostics.hpp"
#include "tvdar/model.hpp"

using namespace tvdar;

namespace {
const NoiseDistribution kGauss{NoiseKind::gaussian_standard};
}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("single-lag statistic matches hand arithmetic") {
  // x = (1, 3, 2, 4): r1 = -0.35, Q = n(n+2) r1^2 / (n-1) = 0.98.
  std::vector<double> x{1.0, 3.0, 2.0, 4.0};
  auto t = ljung_box(x, 1);
  CHECK(t.statistic == doctest::Approx(0.98).epsilon(1e-12));
  CHECK(t.p_value == doctest::Approx(0.3221988).epsilon(1e-6));
}

TEST_CASE("strong dependence forces rejection") {
  auto x = simulate_dar(DarParams(0.8, 1.0, 0.0), 500, kGauss, 61);
  CHECK(ljung_box(x.values, 10).p_value < 0.001);
}

TEST_CASE("constant input is rejected up front") {
  std::vector<double> flat(100, 2.0);
  CHECK_THROWS_AS(ljung_box(flat, 5), std::invalid_argument);
  CHECK_THROWS_AS(ljung_box(std::vector<double>{1.0, 2.0, 3.0}, 5),
                  std::invalid_argument);
}

TEST_CASE("p-values on white noise are close to uniform") {
  const int reps = 2000;
  std::vector<double> pvals;
  pvals.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    auto eta = draw_noise(kGauss, 500, 40000 + r);
    pvals.push_back(ljung_box(eta, 10).p_value);
  }
  std::sort(pvals.begin(), pvals.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    double ecdf_hi = static_cast<double>(i + 1) / reps;
    double ecdf_lo = static_cast<double>(i) / reps;
    ks = std::max({ks, std::fabs(ecdf_hi - pvals[i]), std::fabs(pvals[i] - ecdf_lo)});
  }
  CHECK(ks <= 0.05);
}

TEST_CASE("rolling whiteness flags a deterministic sine") {
  std::vector<double> sine(400);
  for (std::size_t t = 0; t < sine.size(); ++t) {
    sine[t] = std::sin(0.3 * static_cast<double>(t));
  }
  auto rw = rolling_whiteness(DemeanedSeries::from_values(sine), 50, 10, 0.05);
  CHECK(rw.fraction_reject_eta > 0.9);
}

TEST_CASE("upper quantile of squared residuals") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(upper_quantile_sq_residuals(v, 0.5) == 2.0);
  std::vector<double> w{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(upper_quantile_sq_residuals(w, 0.3) == 7.0);
  // gamma -> 1^- with distinct values: the minimum qualifies.
  CHECK(upper_quantile_sq_residuals(w, 0.95) == 1.0);
  CHECK_THROWS_AS(upper_quantile_sq_residuals({}, 0.5), std::invalid_argument);

  // Brute-force enumeration oracle on random inputs.
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> data(40);
    for (double& d : data) d = unif(rng);
    for (double gamma : {0.1, 0.35, 0.7, 0.9}) {
      CHECK(upper_quantile_sq_residuals(data, gamma) ==
            oracle::upper_quantile_brute(data, gamma));
    }
  }
}

TEST_CASE("counting process basics") {
  std::vector<double> v{5.0, 1.0, 7.0, 2.0, 9.0};
  CHECK(g_process(v, 4.0, 0.0) == 0.0);
  CHECK(g_process(v, 100.0, 1.0) == 0.0);  // everything below the threshold
  CHECK(g_process(v, 4.0, 1.0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(g_process(v, 4.0, 0.4) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("exchangeable data gives E G(alpha) = alpha gamma") {
  const std::size_t n = 500;
  const double gamma = 0.8, alpha = 0.37;
  auto base = draw_noise(kGauss, n, 2222);
  for (double& b : base) b = b * b;
  double q = upper_quantile_sq_residuals(base, gamma);
  std::mt19937_64 rng(17);
  double acc = 0.0;
  const int perms = 2000;
  std::vector<double> data = base;
  for (int p = 0; p < perms; ++p) {
    std::shuffle(data.begin(), data.end(), rng);
    acc += g_process(data, q, alpha);
  }
  CHECK(std::fabs(acc / perms - alpha * gamma) <= 0.01);
}

TEST_CASE("G(1) sits within a 1/T band of gamma") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t n = 50 + static_cast<std::size_t>(unif(rng) * 400);
    std::vector<double> v(n);
    for (double& x : v) x = unif(rng);
    double gamma = 0.55 + 0.4 * unif(rng);
    double q = upper_quantile_sq_residuals(v, gamma);
    double g1 = g_process(v, q, 1.0);
    CHECK(g1 <= gamma + 1.0 / static_cast<double>(n));
    CHECK(g1 >= gamma - 1.0 / static_cast<double>(n));
  }
}

TEST_CASE("cp statistic is scale invariant given fixed phi(.)") {
  auto x = simulate_dar(DarParams(0.4, 1.0, 0.2), 600, kGauss, 73);
  LocalFit fit;
  fit.grid = {TimePoint(0.0), TimePoint(1.0)};
  DarParams frozen(0.4, 1.0, 0.2);
  fit.params_at = {frozen, frozen};
  fit.cov_at.resize(2);
  fit.effective_n = {0.0, 0.0};
  fit.kernel = {KernelKind::epanechnikov};
  fit.bandwidth = Bandwidth(0.1);
  fit.n_obs = x.size();

  auto cp1 = cp_statistic(x, fit, 0.9, {});
  DemeanedSeries scaled;
  scaled.values = x.values;
  for (double& v : scaled.values) v *= 7.25;
  auto cp2 = cp_statistic(scaled, fit, 0.9, {});
  CHECK(cp1.statistic == cp2.statistic);
  REQUIRE(cp1.profile.size() == cp2.profile.size());
  for (std::size_t i = 0; i < cp1.profile.size(); ++i) {
    CHECK(cp1.profile[i].first == cp2.profile[i].first);
    CHECK(cp1.profile[i].second == cp2.profile[i].second);
  }
}

TEST_CASE("cp statistic equals the max of its profile and carries a p-value") {
  auto x = simulate_dar(DarParams(0.4, 1.0, 0.2), 500, kGauss, 79);
  auto grid = make_grid(11, 0.1, 0.9);
  auto lf = fit_tvdar(x, grid, {KernelKind::epanechnikov}, Bandwidth(0.2), {});
  auto cp = cp_statistic(x, lf, 0.9, {});
  double best = 0.0;
  for (const auto& [a, v] : cp.profile) best = std::max(best, v);
  CHECK(cp.statistic == best);
  CHECK(cp.argmax_alpha >= 0.0);
  CHECK(cp.argmax_alpha <= 1.0);
  CHECK(cp.p_value == brownian_bridge_pvalue(cp.statistic));

  auto flat = DemeanedSeries::from_values(std::vector<double>(300, 0.5));
  CHECK_THROWS_AS(cp_statistic(flat, lf, 0.9, {}), std::invalid_argument);
}

TEST_CASE("bridge tail probabilities match the reference series") {
  CHECK(brownian_bridge_pvalue(0.0) == 1.0);
  CHECK(brownian_bridge_pvalue(1.358) ==
        doctest::Approx(0.050026797).epsilon(1e-6));
  CHECK(brownian_bridge_pvalue(0.5) == doctest::Approx(0.96394524).epsilon(1e-6));
  CHECK(brownian_bridge_pvalue(2.0) == doctest::Approx(6.7092526e-4).epsilon(1e-6));
  CHECK(brownian_bridge_pvalue(5.047) < 1e-10);
  CHECK_THROWS_AS(brownian_bridge_pvalue(-0.1), std::invalid_argument);
}

TEST_CASE("bridge p-value is monotone and maps into [0, 1]") {
  double prev = 1.0;
  for (double s = 0.0; s <= 6.0; s += 0.01) {
    double p = brownian_bridge_pvalue(s);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p <= prev + 1e-15);
    prev = p;
  }
}

}  // TEST_SUITE
