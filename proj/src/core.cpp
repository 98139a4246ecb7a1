#include "tvdar/core.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <utility>

#include "tvdar/math.hpp"

namespace tvdar {

namespace {

std::mutex g_warn_mutex;
WarningHandler g_warn_handler;

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  g_warn_handler = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  if (g_warn_handler) {
    g_warn_handler(message);
  } else {
    std::fprintf(stderr, "tvdar: warning: %s\n", message.c_str());
  }
}

PriceSeries::PriceSeries(std::vector<std::string> dates, std::vector<double> values,
                         std::map<std::string, std::string> labels,
                         std::vector<double> volume)
    : dates_(std::move(dates)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      volume_(std::move(volume)) {
  if (values_.size() < 2) {
    throw std::invalid_argument("PriceSeries: need at least 2 observations");
  }
  if (dates_.size() != values_.size()) {
    throw std::invalid_argument("PriceSeries: dates and values length mismatch");
  }
  if (!volume_.empty() && volume_.size() != values_.size()) {
    throw std::invalid_argument("PriceSeries: volume length mismatch");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("PriceSeries: non-finite value at index " +
                                  std::to_string(i + 1));
    }
    if (i > 0 && !(dates_[i - 1] < dates_[i])) {
      throw std::invalid_argument("PriceSeries: dates not strictly increasing at index " +
                                  std::to_string(i + 1) + " (" + dates_[i] + ")");
    }
  }
}

DemeanedSeries DemeanedSeries::from_values(std::vector<double> x) {
  DemeanedSeries out;
  out.values = std::move(x);
  out.mean_used = 0.0;
  return out;
}

DarParams::DarParams(double phi_in, double omega_in, double alpha_in)
    : phi(phi_in), omega(omega_in), alpha(alpha_in) {
  if (!std::isfinite(phi) || !std::isfinite(omega) || !std::isfinite(alpha)) {
    throw std::invalid_argument("DarParams: parameters must be finite");
  }
  if (!(omega > 0.0)) {
    throw std::invalid_argument("DarParams: omega must be strictly positive");
  }
  if (alpha < 0.0) {
    throw std::invalid_argument("DarParams: alpha must be nonnegative");
  }
}

TimePoint::TimePoint(double c_in) : c(c_in) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw std::invalid_argument("TimePoint: c must lie in [0, 1]");
  }
}

std::vector<TimePoint> make_grid(std::size_t n, double lo, double hi) {
  if (n == 0) throw std::invalid_argument("make_grid: n must be positive");
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) {
    throw std::invalid_argument("make_grid: need 0 <= lo < hi <= 1");
  }
  std::vector<TimePoint> grid;
  grid.reserve(n);
  if (n == 1) {
    grid.emplace_back(0.5 * (lo + hi));
    return grid;
  }
  for (std::size_t i = 0; i < n; ++i) {
    grid.emplace_back(lo + (hi - lo) * static_cast<double>(i) /
                               static_cast<double>(n - 1));
  }
  return grid;
}

DemeanedSeries demean_global(const PriceSeries& series) {
  const auto& y = series.values();
  double ybar = detail::mean(y);
  DemeanedSeries out;
  out.values.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out.values[i] = y[i] - ybar;

  // Accumulation sanity check: the demeaned series must sum to ~0.
  double total = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += out.values[i];
    scale = std::max(scale, std::fabs(y[i]));
  }
  if (std::fabs(total) > 1e-8 * static_cast<double>(y.size()) * std::max(scale, 1.0)) {
    throw std::runtime_error("demean_global: accumulation tolerance exceeded");
  }

  out.mean_used = ybar;
  out.origin = series;
  return out;
}

DemeanedSeries demean_local(const PriceSeries& series, std::size_t window) {
  const auto& y = series.values();
  if (window < 2 || window > y.size()) {
    throw std::invalid_argument("demean_local: window must lie in [2, length]");
  }
  std::vector<double> means(y.size());
  double running = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    running += y[t];
    if (t >= window) running -= y[t - window];
    std::size_t n = std::min(t + 1, window);
    means[t] = running / static_cast<double>(n);
  }
  DemeanedSeries out;
  out.values.resize(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) out.values[t] = y[t] - means[t];
  out.mean_used = std::move(means);
  out.origin = series;
  return out;
}

}  // namespace tvdar
