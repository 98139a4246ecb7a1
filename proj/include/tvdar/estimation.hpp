#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tvdar/core.hpp"
#include "tvdar/kernels.hpp"
#include "tvdar/math.hpp"

namespace tvdar {

using Sym2 = detail::Sym2;

// Thrown when the data cannot identify the parameters (e.g. constant input).
struct singular_fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Settings for the quasi-likelihood optimizer. The search runs over
// (phi, log omega, log alpha), so positivity holds by construction, with a
// moment-based start plus deterministic perturbations.
struct OptimizerOptions {
  int max_iterations = 2000;
  double tolerance = 1e-8;      // simplex diameter in transformed coordinates
  int multistarts = 5;          // moment start + (multistarts - 1) perturbations
  std::uint64_t start_seed = 0x7c0ffee5ULL;
  std::size_t min_observations = 10;
  double phi_box = 2.0;         // |phi| search bound
};

// Estimated asymptotic covariance pieces. sigma_hat scales the phi block;
// (kappa_hat, omega_hat) the (omega, alpha) block. Standard errors are absent
// when the corresponding block is numerically singular.
struct AsymptoticCov {
  double sigma_hat = 0.0;
  Sym2 omega_hat{};
  double kappa_hat = 0.0;
  std::optional<double> se_phi;
  std::optional<double> se_omega;
  std::optional<double> se_alpha;
  bool sigma_singular = false;
  bool omega_singular = false;
};

struct FitResult {
  DarParams params;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  AsymptoticCov cov;
  std::size_t n_used = 0;
};

// Standardized residuals; values[j] corresponds to observation j + 2 in
// 1-based time (the first observation has no predecessor).
struct Residuals {
  std::vector<double> values;
  std::size_t aligned_index = 2;
};

// Gaussian quasi log-likelihood
//   -1/2 sum_{t=2}^{T} [ ln(omega + alpha x_{t-1}^2)
//                        + (x_t - phi x_{t-1})^2 / (omega + alpha x_{t-1}^2) ].
double qml_loglik(std::span<const double> x, const DarParams& params);
double qml_loglik(const DemeanedSeries& x, const DarParams& params);

FitResult fit_dar(std::span<const double> x, const OptimizerOptions& options = {});
FitResult fit_dar(const DemeanedSeries& x, const OptimizerOptions& options = {});

Residuals residuals(std::span<const double> x, const DarParams& params);
Residuals residuals(const DemeanedSeries& x, const DarParams& params);

AsymptoticCov asymptotic_cov(std::span<const double> x, const DarParams& params);
AsymptoticCov asymptotic_cov(const DemeanedSeries& x, const DarParams& params);

struct LocalFitOptions : OptimizerOptions {
  // Warm-start each grid point from its predecessor (the parameter functions
  // are continuous). Ignored when threads > 1; cold starts keep the result
  // independent of scheduling.
  bool warm_start = true;
  int threads = 1;
};

// Functional estimates on a grid of rescaled times, with localized
// covariances. Points with too small an effective sample stay unestimated.
struct LocalFit {
  std::vector<TimePoint> grid;
  std::vector<std::optional<DarParams>> params_at;
  std::vector<AsymptoticCov> cov_at;
  std::vector<double> effective_n;  // realized kernel weight sums
  KernelSpec kernel;
  Bandwidth bandwidth{1.0};
  std::size_t n_obs = 0;

  bool estimated(std::size_t i) const { return params_at[i].has_value(); }
  std::size_t estimated_count() const;

  // Linear interpolation between estimated grid points, clamped outside the
  // estimated range.
  double phi_at(double c) const;
  double omega_at(double c) const;
  double alpha_at(double c) const;
};

LocalFit fit_tvdar(const DemeanedSeries& x, const std::vector<TimePoint>& grid,
                   KernelSpec kernel, Bandwidth b,
                   const LocalFitOptions& options = {});

// Residuals standardized with the interpolated local parameter functions.
Residuals local_residuals(const DemeanedSeries& x, const LocalFit& fit);

// Half-width of the local normal band: z * sqrt(int K^2 * block_variance /
// (T b)). Exposed separately so the scaling law is testable on its own.
double local_band_half_width(double level, KernelSpec kernel,
                             double block_variance, std::size_t T, Bandwidth b);

struct LocalBands {
  std::vector<TimePoint> grid;
  std::vector<double> phi_lo, phi_hi;
  std::vector<double> omega_lo, omega_hi;
  std::vector<double> alpha_lo, alpha_hi;
  double level = 0.95;
};

LocalBands local_confidence_bands(const LocalFit& fit, double level);

}  // namespace tvdar
