#include "tvdar/forecast.hpp"

#include <cmath>
#include <stdexcept>

#include "tvdar/math.hpp"

namespace tvdar {

std::vector<ForecastRecord> one_step_forecast(const PriceSeries& series,
                                              std::size_t window,
                                              const ForecastOptions& options) {
  const std::size_t T = series.size();
  if (window < 2 || window > T - 1) {
    throw std::invalid_argument("one_step_forecast: window must lie in [2, length - 1]");
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw std::invalid_argument("one_step_forecast: level outside (0, 1)");
  }
  DemeanedSeries x = demean_local(series, window);
  const auto& means = std::get<std::vector<double>>(x.mean_used);
  const double z = detail::normal_quantile(0.5 * (1.0 + options.level));

  // Forecast origins t = window..T (1-based); each record predicts t+1.
  std::vector<ForecastRecord> records(T - window + 1);
  detail::parallel_for(records.size(), options.threads, [&](std::size_t i) {
    std::size_t t = window + i;  // 1-based origin
    ForecastRecord& rec = records[i];
    rec.origin_date = series.dates()[t - 1];
    if (t < T) {
      rec.target_date = series.dates()[t];
      rec.actual = series.values()[t];
    }
    std::span<const double> slice(x.values.data() + (t - window), window);
    try {
      rec.x_t = x.values[t - 1];
      FitResult fit = fit_dar(slice, options.optimizer);
      rec.window_fit = fit.params;
      rec.sigma_hat = fit.cov.sigma_hat;
      rec.y_hat = means[t - 1] + fit.params.phi * rec.x_t;
      if (options.interval == IntervalKind::parameter_only) {
        auto [lo, hi] = prediction_interval(rec.y_hat, fit.cov.sigma_hat, rec.x_t,
                                            window, options.level);
        rec.lower = lo;
        rec.upper = hi;
      } else {
        double sd = std::sqrt(fit.params.omega + fit.params.alpha * rec.x_t * rec.x_t);
        rec.lower = rec.y_hat - z * sd;
        rec.upper = rec.y_hat + z * sd;
      }
    } catch (const singular_fit_error&) {
      if (rec.x_t == 0.0) {
        // Constant window: the forecast is the local mean itself and the
        // phi term contributes nothing regardless of the unidentified fit.
        rec.y_hat = means[t - 1];
        rec.lower = rec.y_hat;
        rec.upper = rec.y_hat;
      } else {
        rec.skipped = true;
      }
    } catch (const std::exception&) {
      rec.skipped = true;
    }
  });
  return records;
}

std::pair<double, double> prediction_interval(double y_hat, double sigma_hat,
                                              double x_t, std::size_t n,
                                              double level) {
  if (!(sigma_hat > 0.0)) {
    throw std::invalid_argument("prediction_interval: sigma_hat must be positive");
  }
  if (n < 2) throw std::invalid_argument("prediction_interval: n must be >= 2");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("prediction_interval: level outside (0, 1)");
  }
  double z = detail::normal_quantile(0.5 * (1.0 + level));
  double half = z / std::sqrt(static_cast<double>(n)) *
                std::sqrt(x_t * x_t / sigma_hat);
  return {y_hat - half, y_hat + half};
}

double mspe(std::span<const ForecastRecord> records) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& rec : records) {
    if (rec.skipped || !rec.actual) continue;
    double e = *rec.actual - rec.y_hat;
    acc += e * e;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("mspe: no records with realized actuals");
  return acc / static_cast<double>(n);
}

}  // namespace tvdar
