#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tvdar/core.hpp"
#include "tvdar/estimation.hpp"

namespace tvdar {

// One-step-ahead forecast produced from the trailing estimation window ending
// at origin_date. target_date is empty for the final, beyond-sample record.
struct ForecastRecord {
  std::string origin_date;
  std::string target_date;
  double y_hat = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> actual;
  DarParams window_fit{0.0, 1.0, 0.0};
  double x_t = 0.0;        // demeaned origin observation
  double sigma_hat = 0.0;  // phi-block information from the window fit
  bool skipped = false;    // window fit failed; y_hat etc. are meaningless
};

enum class IntervalKind {
  // Parameter-uncertainty band y_hat -+ z/sqrt(n) * sqrt(x_t^2 / Sigma_hat);
  // collapses to a point at x_t = 0 and ignores the innovation term.
  parameter_only,
  // y_hat -+ z * sqrt(omega_hat + alpha_hat x_t^2): covers the innovation,
  // for readers who want interval coverage of the realized price.
  innovation_inclusive,
};

struct ForecastOptions {
  double level = 0.95;
  IntervalKind interval = IntervalKind::parameter_only;
  OptimizerOptions optimizer{};
  int threads = 1;
};

// For each t >= window: demean locally over the trailing window, fit the
// constant-parameter model on the window, and forecast
// y_hat_{t+1} = m_hat(t) + phi_hat * x_t. Uses only data up to t.
std::vector<ForecastRecord> one_step_forecast(const PriceSeries& series,
                                              std::size_t window,
                                              const ForecastOptions& options = {});

// The parameter-uncertainty interval around y_hat; n is the estimation
// window length backing sigma_hat.
std::pair<double, double> prediction_interval(double y_hat, double sigma_hat,
                                              double x_t, std::size_t n,
                                              double level);

// Mean squared prediction error over records with realized actuals.
double mspe(std::span<const ForecastRecord> records);

}  // namespace tvdar
