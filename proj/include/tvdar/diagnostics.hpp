#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tvdar/estimation.hpp"
#include "tvdar/test_result.hpp"

namespace tvdar {

// Portmanteau Q = n(n+2) sum_{k=1}^{lags} r_k^2/(n-k) against the chi-squared
// upper tail with `lags` degrees of freedom (no degrees-of-freedom
// correction; see README notes).
TestResult ljung_box(std::span<const double> series, int lags, double level = 0.05);

struct RollingWhiteness {
  struct Window {
    std::size_t end_index = 0;  // 1-based index of the window's last observation
    double p_eta = 1.0;
    double p_eta_sq = 1.0;
    bool skipped = false;
  };
  double fraction_reject_eta = 0.0;
  double fraction_reject_eta_sq = 0.0;
  std::size_t skipped_windows = 0;
  std::vector<Window> windows;
};

// Fits the constant-parameter model on every trailing window, then runs the
// whiteness test on the residuals and their squares. Per-window fit failures
// are counted and skipped, never fatal.
RollingWhiteness rolling_whiteness(const DemeanedSeries& x, std::size_t window,
                                   int lags, double level,
                                   const OptimizerOptions& options = {},
                                   int threads = 1);

// Smallest observed squared-residual value q^2 (or 0) such that the fraction
// of entries strictly greater than q^2 is at most gamma.
double upper_quantile_sq_residuals(std::span<const double> resid_sq, double gamma);

// G(alpha) = (1/T) #{ t <= floor(alpha T) : resid_sq[t] >= q_sq }.
double g_process(std::span<const double> resid_sq, double q_sq, double alpha);

struct CpResult {
  double statistic = 0.0;
  double gamma = 0.0;
  double quantile_sq = 0.0;
  std::vector<std::pair<double, double>> profile;  // (alpha, scaled deviation)
  double argmax_alpha = 0.0;
  double p_value = 1.0;
};

struct CpOptions {
  double alpha_grid_step = 0.001;
  // Sub-sample [a, b] (fractions) used for the quantile; the full sample by
  // default.
  double quantile_lo = 0.0;
  double quantile_hi = 1.0;
};

// Variance-constancy statistic sup_alpha sqrt(T/(gamma(1-gamma)))
// |G(alpha) - alpha gamma| built from the unstandardized residuals
// e_t = x_t - phi_hat(t/T) x_{t-1}. G is a step function, so on top of the
// alpha grid the profile includes every jump point; the reported supremum is
// exact and argmax_alpha is where it is attained.
CpResult cp_statistic(const DemeanedSeries& x, const LocalFit& fit, double gamma,
                      const CpOptions& options = {});

// P(sup |B(t)| >= x) for a Brownian bridge B, by the alternating series
// 2 sum_{k>=1} (-1)^{k+1} exp(-2 k^2 x^2), truncated below 1e-12.
double brownian_bridge_pvalue(double stat);

}  // namespace tvdar
