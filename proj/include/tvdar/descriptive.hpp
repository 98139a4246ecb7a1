#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tvdar/core.hpp"

namespace tvdar {

enum class CiMode {
  standard,        // m_hat +- z * sd / sqrt(n)
  paper_footnote,  // m_hat -+ z * sqrt(sd / n), kept for figure replication
};

// Trailing-window mean and (denominator n) variance with confidence bounds;
// entries start at the first full window.
struct RollingStats {
  std::vector<std::string> dates;
  std::vector<double> local_mean;
  std::vector<double> local_var;
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;
  std::size_t window = 0;
  std::size_t start_index = 0;  // 1-based index of the first reported entry
  CiMode ci_mode = CiMode::standard;
};

RollingStats rolling_mean_var(const PriceSeries& series, std::size_t window,
                              double level, CiMode mode = CiMode::standard);

// Sample autocorrelations r_0..r_max_lag, normalized by the lag-0
// autocovariance.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

// Whether sigma_e(t) reuses the per-date rho(tau) inside the window sum or
// holds the window-end estimate fixed.
enum class RollingRhoMode { per_tau, fixed_at_end };

struct Ar1Fit {
  double rho = 0.0;
  double sigma2 = 0.0;
  struct Rolling {
    std::size_t window = 0;
    std::size_t rho_start = 0;      // 1-based date of the first rho estimate
    std::size_t sigma_start = 0;    // 1-based date of the first sigma_e value
    std::vector<double> rho;        // NaN where the window was degenerate
    std::vector<double> sigma_e;
    std::size_t skipped = 0;
  };
  std::optional<Rolling> rolling;
};

// Least-squares AR(1) slope and mean squared residual.
Ar1Fit fit_ar1(const DemeanedSeries& x);

Ar1Fit rolling_ar1(const DemeanedSeries& x, std::size_t window,
                   RollingRhoMode mode = RollingRhoMode::per_tau);

}  // namespace tvdar
