#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tvdar/estimation.hpp"
#include "tvdar/kernels.hpp"
#include "tvdar/model.hpp"
#include "tvdar/test_result.hpp"

namespace tvdar {

// Lyapunov exponent E ln|phi + eta sqrt(alpha)| for eta ~ U[-1, 1], from the
// antiderivative u ln u - u on each side of the kink at |phi| = sqrt(alpha);
// the kink itself takes the common limit ln(2 sqrt(alpha)) - 1. Even in phi
// by construction. alpha = 0 degenerates to ln|phi|.
double lyapunov_uniform(double phi, double alpha);

// E ln|phi + eta sqrt(alpha)| for a named noise density, by adaptive
// quadrature with the integrand split at the log singularity
// eta = -phi/sqrt(alpha) whenever it falls inside the support.
double lyapunov_quadrature(double phi, double alpha, NoiseDistribution dist,
                           double abs_tol = 1e-8);

// Plug-in estimator (1/n) sum ln|phi_hat + eta_hat_t sqrt(alpha_hat)|.
// Terms with an exact zero argument (a measure-zero event) are excluded and
// counted into *excluded if provided. alpha = 0 reduces to ln|phi|.
double lyapunov_plugin(const DarParams& params, const Residuals& resid,
                       std::size_t* excluded = nullptr);

// Kernel-weighted local plug-in value at rescaled time c, normalized by the
// realized weight sum (same boundary policy as the kernels module).
double lyapunov_local(const LocalFit& fit, const Residuals& resid, TimePoint c,
                      KernelSpec kernel, Bandwidth b);

struct XiEstimate {
  double xi = 0.0;
  double variance = 0.0;  // asymptotic variance of sqrt(T) (xi_hat - xi)
};

// xi = phi^2 + alpha with delta-method variance 4 phi^2 Sigma^{-1} +
// kappa (Omega^{-1})_{alpha,alpha}; the phi and (omega, alpha) blocks are
// asymptotically independent, so no cross term appears.
XiEstimate xi_measure(const DarParams& params, const AsymptoticCov& cov);

// One-sided Wald test of xi < xi0 against xi >= xi0.
TestResult xi_wald_test(double xi, double variance, std::size_t T, double xi0,
                        double level = 0.05);

// Sampling distribution of the plug-in Lyapunov estimator by re-simulation at
// theta_hat: simulate, refit, recompute, reps times. The estimator's limit
// law is kinked, so simulation stands in for a Taylor-expansion band.
std::vector<double> lambda2_sampling(const DarParams& theta_hat, std::size_t T,
                                     NoiseDistribution dist, int reps,
                                     std::uint64_t seed,
                                     const OptimizerOptions& options = {},
                                     int threads = 1);

struct StabilityReport {
  std::optional<double> lambda_analytic;    // uniform-noise closed form
  std::optional<double> lambda_quadrature;  // assumes a named density
  double lambda_plugin = 0.0;
  double xi = 0.0;
  double xi_variance = 0.0;
  TestResult xi_test;
  std::vector<TimePoint> local_grid;
  std::vector<double> local_lambda;
  std::vector<double> local_xi, local_xi_lo, local_xi_hi;
  std::vector<double> lambda_samples;  // bootstrap-by-simulation draws
};

// Local xi(c) = phi(c)^2 + alpha(c) with delta-method intervals built from
// the localized covariances. Unestimated points come back as NaN.
void local_xi_with_intervals(const LocalFit& fit, double level,
                             std::vector<double>& xi,
                             std::vector<double>& lo, std::vector<double>& hi);

}  // namespace tvdar
