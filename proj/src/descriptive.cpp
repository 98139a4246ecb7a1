#include "tvdar/descriptive.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tvdar/math.hpp"

namespace tvdar {

RollingStats rolling_mean_var(const PriceSeries& series, std::size_t window,
                              double level, CiMode mode) {
  const auto& y = series.values();
  if (window < 2 || window > y.size()) {
    throw std::invalid_argument("rolling_mean_var: window must lie in [2, length]");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("rolling_mean_var: level outside (0, 1)");
  }
  const double z = detail::normal_quantile(0.5 * (1.0 + level));
  const double n = static_cast<double>(window);

  RollingStats out;
  out.window = window;
  out.start_index = window;
  out.ci_mode = mode;
  for (std::size_t t = window; t <= y.size(); ++t) {
    std::span<const double> slice(y.data() + (t - window), window);
    double m = detail::mean(slice);
    double v = detail::variance(slice);
    double sd = std::sqrt(v);
    double half = mode == CiMode::standard ? z * sd / std::sqrt(n)
                                           : z * std::sqrt(sd / n);
    out.dates.push_back(series.dates()[t - 1]);
    out.local_mean.push_back(m);
    out.local_var.push_back(v);
    out.ci_lower.push_back(m - half);
    out.ci_upper.push_back(m + half);
  }
  return out;
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2 || max_lag >= n - 1) {
    throw std::invalid_argument("acf: need max_lag < length - 1");
  }
  double m = detail::mean(series);
  double denom = 0.0;
  for (double v : series) denom += (v - m) * (v - m);
  if (!(denom > 0.0)) throw std::invalid_argument("acf: constant input");

  std::vector<double> out(max_lag + 1);
  out[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = k; t < n; ++t) {
      num += (series[t] - m) * (series[t - k] - m);
    }
    out[k] = num / denom;
  }
  return out;
}

namespace {

// AR(1) slope over 0-based responses [first, last]; NaN when the lagged
// sum of squares vanishes.
double ar1_slope(std::span<const double> x, std::size_t first, std::size_t last) {
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = first; t <= last; ++t) {
    sxy += x[t] * x[t - 1];
    sxx += x[t - 1] * x[t - 1];
  }
  if (!(sxx > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

}  // namespace

Ar1Fit fit_ar1(const DemeanedSeries& x) {
  const auto& v = x.values;
  if (v.size() < 3) throw std::invalid_argument("fit_ar1: need at least 3 observations");
  double rho = ar1_slope(v, 1, v.size() - 1);
  if (!std::isfinite(rho)) {
    throw std::invalid_argument("fit_ar1: zero lagged sum of squares");
  }
  double acc = 0.0;
  for (std::size_t t = 1; t < v.size(); ++t) {
    double e = v[t] - rho * v[t - 1];
    acc += e * e;
  }
  Ar1Fit out;
  out.rho = rho;
  out.sigma2 = acc / static_cast<double>(v.size() - 1);
  return out;
}

Ar1Fit rolling_ar1(const DemeanedSeries& x, std::size_t window, RollingRhoMode mode) {
  const auto& v = x.values;
  if (window < 3) throw std::invalid_argument("rolling_ar1: window must be >= 3");
  if (v.size() < window + 1) {
    throw std::invalid_argument("rolling_ar1: series shorter than window + 1");
  }
  Ar1Fit out = fit_ar1(x);
  Ar1Fit::Rolling roll;
  roll.window = window;
  roll.rho_start = window + 1;  // first date whose full window has lags
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // rho(t) over responses tau in [t-window+1, t], 1-based t.
  for (std::size_t t = window + 1; t <= v.size(); ++t) {
    double r = ar1_slope(v, t - window, t - 1);  // 0-based bounds
    if (!std::isfinite(r)) ++roll.skipped;
    roll.rho.push_back(r);
  }

  auto rho_at = [&](std::size_t t_1based) {  // defined for t >= window + 1
    return roll.rho[t_1based - roll.rho_start];
  };
  roll.sigma_start = mode == RollingRhoMode::per_tau ? 2 * window : window + 1;
  for (std::size_t t = roll.sigma_start; t <= v.size(); ++t) {
    double acc = 0.0;
    bool ok = true;
    for (std::size_t tau = t - window + 1; tau <= t; ++tau) {
      double r = mode == RollingRhoMode::per_tau ? rho_at(tau) : rho_at(t);
      if (!std::isfinite(r)) {
        ok = false;
        break;
      }
      double e = v[tau - 1] - r * v[tau - 2];  // 0-based access
      acc += e * e;
    }
    if (!ok) {
      roll.sigma_e.push_back(nan);
      ++roll.skipped;
      continue;
    }
    roll.sigma_e.push_back(std::sqrt(acc / static_cast<double>(window)));
  }
  out.rolling = std::move(roll);
  return out;
}

}  // namespace tvdar
