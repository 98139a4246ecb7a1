#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tvdar {

// Non-fatal diagnostics (bandwidth admissibility, stationarity checks, ...)
// go through a process-wide handler. The default prints to stderr; tests and
// embedding applications may install their own sink. Pass nullptr to restore
// the default.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

// Thrown when a simulated path overflows the explosion guard.
struct explosion_error : std::runtime_error {
  std::size_t index;
  explosion_error(std::size_t index, const std::string& what)
      : std::runtime_error(what), index(index) {}
};

// Dated, ordered price observations in level units. Dates are opaque ordered
// keys (ISO yyyy-mm-dd); no calendar arithmetic happens here beyond ordering.
class PriceSeries {
 public:
  PriceSeries(std::vector<std::string> dates, std::vector<double> values,
              std::map<std::string, std::string> labels = {},
              std::vector<double> volume = {});

  std::size_t size() const { return values_.size(); }
  const std::vector<std::string>& dates() const { return dates_; }
  const std::vector<double>& values() const { return values_; }
  const std::map<std::string, std::string>& labels() const { return labels_; }
  const std::vector<double>& volume() const { return volume_; }  // may be empty

 private:
  std::vector<std::string> dates_;
  std::vector<double> values_;
  std::map<std::string, std::string> labels_;
  std::vector<double> volume_;
};

// Deviations from a mean, in level units. mean_used is either the single
// global mean or the per-index local mean sequence that was subtracted.
struct DemeanedSeries {
  std::vector<double> values;
  std::variant<double, std::vector<double>> mean_used = 0.0;
  std::optional<PriceSeries> origin;

  std::size_t size() const { return values.size(); }

  // Wraps an already-centered sequence (e.g. simulator output).
  static DemeanedSeries from_values(std::vector<double> x);
};

// Parameter triple of the DAR(1) recursion. omega is in squared level units;
// phi and alpha are dimensionless.
struct DarParams {
  double phi;
  double omega;
  double alpha;

  DarParams(double phi, double omega, double alpha);
};

// Rescaled time c = t/T in [0, 1].
struct TimePoint {
  double c;
  explicit TimePoint(double c_in);
};

// Evenly spaced grid of n rescaled-time points spanning [lo, hi].
std::vector<TimePoint> make_grid(std::size_t n, double lo = 0.0, double hi = 1.0);

// x_t = y_t - mean(y). Exact inverse: adding mean_used back reproduces the
// input for data within a binade of the mean.
DemeanedSeries demean_global(const PriceSeries& series);

// x_t = y_t - trailing mean over indices max(1, t-window+1)..t. The first
// window-1 entries use the available shorter prefix; estimation code may
// still drop them.
DemeanedSeries demean_local(const PriceSeries& series, std::size_t window);

}  // namespace tvdar
