#include "tvdar/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tvdar/math.hpp"

namespace tvdar {

TestResult ljung_box(std::span<const double> series, int lags, double level) {
  if (lags < 1) throw std::invalid_argument("ljung_box: lags must be >= 1");
  const std::size_t n = series.size();
  if (n <= static_cast<std::size_t>(lags) + 1) {
    throw std::invalid_argument("ljung_box: need length > lags + 1");
  }
  double m = detail::mean(series);
  double denom = 0.0;
  for (double v : series) denom += (v - m) * (v - m);
  if (!(denom > 0.0)) {
    throw std::invalid_argument("ljung_box: constant input, autocorrelation undefined");
  }
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
      num += (series[t] - m) * (series[t - k] - m);
    }
    double rk = num / denom;
    q += rk * rk / static_cast<double>(n - static_cast<std::size_t>(k));
  }
  q *= static_cast<double>(n) * static_cast<double>(n + 2);

  TestResult r;
  r.name = "ljung_box";
  r.level = level;
  r.statistic = q;
  r.p_value = detail::chi_squared_sf(q, lags);
  r.reject = r.p_value < level;
  r.nuisance["lags"] = static_cast<double>(lags);
  r.nuisance["n"] = static_cast<double>(n);
  return r;
}

RollingWhiteness rolling_whiteness(const DemeanedSeries& x, std::size_t window,
                                   int lags, double level,
                                   const OptimizerOptions& options, int threads) {
  if (window < static_cast<std::size_t>(lags) + 5) {
    throw std::invalid_argument("rolling_whiteness: window must be >= lags + 5");
  }
  const std::size_t T = x.size();
  if (T < window) throw std::invalid_argument("rolling_whiteness: window exceeds length");

  RollingWhiteness out;
  out.windows.resize(T - window + 1);
  detail::parallel_for(out.windows.size(), threads, [&](std::size_t i) {
    auto& rec = out.windows[i];
    rec.end_index = i + window;  // 1-based
    std::span<const double> slice(x.values.data() + i, window);
    try {
      FitResult fit = fit_dar(slice, options);
      Residuals res = residuals(slice, fit.params);
      std::vector<double> sq(res.values.size());
      for (std::size_t j = 0; j < sq.size(); ++j) sq[j] = res.values[j] * res.values[j];
      rec.p_eta = ljung_box(res.values, lags, level).p_value;
      rec.p_eta_sq = ljung_box(sq, lags, level).p_value;
    } catch (const std::exception&) {
      rec.skipped = true;
    }
  });

  std::size_t used = 0, rej_eta = 0, rej_eta_sq = 0;
  for (const auto& rec : out.windows) {
    if (rec.skipped) {
      ++out.skipped_windows;
      continue;
    }
    ++used;
    if (rec.p_eta < level) ++rej_eta;
    if (rec.p_eta_sq < level) ++rej_eta_sq;
  }
  if (used > 0) {
    out.fraction_reject_eta = static_cast<double>(rej_eta) / static_cast<double>(used);
    out.fraction_reject_eta_sq =
        static_cast<double>(rej_eta_sq) / static_cast<double>(used);
  }
  return out;
}

double upper_quantile_sq_residuals(std::span<const double> resid_sq, double gamma) {
  if (resid_sq.empty()) throw std::invalid_argument("upper_quantile_sq_residuals: empty input");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("upper_quantile_sq_residuals: gamma outside (0, 1)");
  }
  const double n = static_cast<double>(resid_sq.size());
  std::vector<double> sorted(resid_sq.begin(), resid_sq.end());
  std::sort(sorted.begin(), sorted.end());

  auto fraction_above = [&](double q) {
    // entries strictly greater than q
    auto it = std::upper_bound(sorted.begin(), sorted.end(), q);
    return static_cast<double>(sorted.end() - it) / n;
  };
  if (fraction_above(0.0) <= gamma) return 0.0;
  for (double v : sorted) {
    if (fraction_above(v) <= gamma) return v;
  }
  return sorted.back();  // unreachable: the max always qualifies
}

double g_process(std::span<const double> resid_sq, double q_sq, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("g_process: alpha outside [0, 1]");
  }
  const double n = static_cast<double>(resid_sq.size());
  std::size_t cutoff = static_cast<std::size_t>(std::floor(alpha * n));
  cutoff = std::min(cutoff, resid_sq.size());
  std::size_t count = 0;
  for (std::size_t t = 0; t < cutoff; ++t) {
    if (resid_sq[t] >= q_sq) ++count;
  }
  return static_cast<double>(count) / n;
}

CpResult cp_statistic(const DemeanedSeries& x, const LocalFit& fit, double gamma,
                      const CpOptions& options) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("cp_statistic: gamma outside (0, 1)");
  }
  if (!(options.alpha_grid_step > 0.0 && options.alpha_grid_step <= 1.0)) {
    throw std::invalid_argument("cp_statistic: bad alpha grid step");
  }
  const std::size_t T = x.size();
  std::vector<double> resid_sq(T - 1);
  for (std::size_t t = 1; t < T; ++t) {
    double c = static_cast<double>(t + 1) / static_cast<double>(T);
    double e = x.values[t] - fit.phi_at(c) * x.values[t - 1];
    resid_sq[t - 1] = e * e;
  }
  double lo = *std::min_element(resid_sq.begin(), resid_sq.end());
  double hi = *std::max_element(resid_sq.begin(), resid_sq.end());
  if (!(hi > lo)) {
    throw std::invalid_argument("cp_statistic: degenerate residuals (all equal)");
  }

  const double n = static_cast<double>(resid_sq.size());
  std::span<const double> quant_slice(resid_sq);
  if (options.quantile_lo > 0.0 || options.quantile_hi < 1.0) {
    auto first = static_cast<std::size_t>(std::floor(options.quantile_lo * n));
    auto last = static_cast<std::size_t>(std::ceil(options.quantile_hi * n));
    last = std::min(last, resid_sq.size());
    if (first >= last) throw std::invalid_argument("cp_statistic: empty quantile window");
    quant_slice = std::span<const double>(resid_sq.data() + first, last - first);
  }
  double q_sq = upper_quantile_sq_residuals(quant_slice, gamma);

  CpResult out;
  out.gamma = gamma;
  out.quantile_sq = q_sq;

  const double scale = std::sqrt(n / (gamma * (1.0 - gamma)));
  // Cumulative exceedance counts make each G evaluation O(1).
  std::vector<std::size_t> cum(resid_sq.size() + 1, 0);
  for (std::size_t t = 0; t < resid_sq.size(); ++t) {
    cum[t + 1] = cum[t] + (resid_sq[t] >= q_sq ? 1 : 0);
  }
  auto g_count = [&](std::size_t cutoff) {
    return static_cast<double>(cum[std::min(cutoff, resid_sq.size())]) / n;
  };
  auto consider = [&](double alpha, double value) {
    if (value > out.statistic) {
      out.statistic = value;
      out.argmax_alpha = alpha;
    }
  };

  // Regular grid for the reported profile. G jumps only at multiples of 1/n,
  // so the cutoff is computed as an integer count (with a nudge against
  // representation error at exact multiples).
  for (double a = 0.0; a < 1.0 + 0.5 * options.alpha_grid_step;
       a += options.alpha_grid_step) {
    double alpha = std::min(a, 1.0);
    auto cutoff = static_cast<std::size_t>(std::floor(alpha * n + 1e-9));
    double value = scale * std::fabs(g_count(cutoff) - alpha * gamma);
    out.profile.emplace_back(alpha, value);
    consider(alpha, value);
  }
  // G is a step function, so between grid points the supremum lives at the
  // jump points t/n: on [t/n, (t+1)/n) the deviation is linear in alpha and
  // extremal at the interval ends. Evaluating both one-sided values at every
  // t makes the reported supremum exact.
  for (std::size_t t = 0; t <= resid_sq.size(); ++t) {
    double g = g_count(t);
    double a_left = static_cast<double>(t) / n;
    double v_left = scale * std::fabs(g - a_left * gamma);
    out.profile.emplace_back(a_left, v_left);
    consider(a_left, v_left);
    if (t < resid_sq.size()) {
      // Left limit at the next jump: approached, not attained, but part of
      // the supremum over [0, 1].
      double a_right = static_cast<double>(t + 1) / n;
      double v_right = scale * std::fabs(g - a_right * gamma);
      out.profile.emplace_back(a_right, v_right);
      consider(a_right, v_right);
    }
  }
  std::sort(out.profile.begin(), out.profile.end());
  out.profile.erase(std::unique(out.profile.begin(), out.profile.end()),
                    out.profile.end());
  out.p_value = brownian_bridge_pvalue(out.statistic);
  return out;
}

double brownian_bridge_pvalue(double stat) {
  if (stat < 0.0) throw std::invalid_argument("brownian_bridge_pvalue: stat must be >= 0");
  if (stat < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100000; ++k) {
    double term = std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) *
                           stat * stat);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace tvdar
