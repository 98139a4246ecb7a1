#include "tvdar/stability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tvdar/math.hpp"

namespace tvdar {

namespace {

// x (ln x - 1), continued by its limit 0 at x = 0.
double xlnx_minus_x(double x) {
  return x == 0.0 ? 0.0 : x * (std::log(x) - 1.0);
}

}  // namespace

double lyapunov_uniform(double phi, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("lyapunov_uniform: alpha must be >= 0");
  double a = std::fabs(phi);
  if (alpha == 0.0) {
    if (a == 0.0) {
      throw std::invalid_argument("lyapunov_uniform: (phi, alpha) = (0, 0) is undefined");
    }
    return std::log(a);
  }
  double s = std::sqrt(alpha);
  if (a > s) {
    return (xlnx_minus_x(a + s) - xlnx_minus_x(a - s)) / (2.0 * s);
  }
  return (xlnx_minus_x(a + s) + xlnx_minus_x(s - a)) / (2.0 * s);
}

double lyapunov_quadrature(double phi, double alpha, NoiseDistribution dist,
                           double abs_tol) {
  if (alpha < 0.0) throw std::invalid_argument("lyapunov_quadrature: alpha must be >= 0");
  if (phi == 0.0 && alpha == 0.0) {
    throw std::invalid_argument("lyapunov_quadrature: (phi, alpha) = (0, 0) is undefined");
  }
  if (alpha == 0.0) return std::log(std::fabs(phi));

  double s = std::sqrt(alpha);
  auto integrand = [phi, s, dist](double eta) {
    return std::log(std::fabs(phi + eta * s)) * dist.density(eta);
  };
  auto [lo, hi] = dist.quadrature_range();
  double sing = -phi / s;
  double tol = std::min(abs_tol, 1e-10);
  if (sing <= lo || sing >= hi) {
    return detail::integrate(integrand, lo, hi, tol);
  }
  // Offset the endpoints off the singularity; ln|.| is integrable, so the
  // skipped sliver contributes O(eps ln eps), far below the tolerance.
  double eps = 1e-13 * std::max(1.0, std::fabs(sing));
  double left_hi = std::max(lo, sing - eps);
  double right_lo = std::min(hi, sing + eps);
  return detail::integrate(integrand, lo, left_hi, 0.5 * tol) +
         detail::integrate(integrand, right_lo, hi, 0.5 * tol);
}

double lyapunov_plugin(const DarParams& params, const Residuals& resid,
                       std::size_t* excluded) {
  if (excluded) *excluded = 0;
  if (params.alpha == 0.0) {
    if (params.phi == 0.0) {
      throw std::invalid_argument("lyapunov_plugin: (phi, alpha) = (0, 0) is undefined");
    }
    return std::log(std::fabs(params.phi));
  }
  if (resid.values.empty()) {
    throw std::invalid_argument("lyapunov_plugin: empty residuals");
  }
  double s = std::sqrt(params.alpha);
  double acc = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
  for (double eta : resid.values) {
    double arg = std::fabs(params.phi + eta * s);
    if (arg == 0.0) {
      ++skipped;
      continue;
    }
    acc += std::log(arg);
    ++used;
  }
  if (skipped > 0) {
    warn("lyapunov_plugin: excluded " + std::to_string(skipped) +
         " exactly-zero terms");
    if (excluded) *excluded = skipped;
  }
  if (used == 0) {
    throw std::runtime_error("lyapunov_plugin: every term was excluded");
  }
  return acc / static_cast<double>(used);
}

double lyapunov_local(const LocalFit& fit, const Residuals& resid, TimePoint c,
                      KernelSpec kernel, Bandwidth b) {
  // resid.values[j] belongs to 1-based observation t = j + 2; its kernel
  // weight is evaluated at t/T, matching the local likelihood indexing.
  const std::size_t T = fit.n_obs;
  if (resid.values.size() + 1 != T) {
    throw std::invalid_argument("lyapunov_local: residuals not aligned with fit");
  }
  KernelWeights kw = weights_at(kernel, b, c, T);
  double acc = 0.0;
  double wsum = 0.0;
  for (std::size_t j = 0; j < resid.values.size(); ++j) {
    std::size_t t = j + 2;  // 1-based
    double w = kw.w[t - 1];
    if (w <= 0.0) continue;
    double ct = static_cast<double>(t) / static_cast<double>(T);
    double arg = std::fabs(fit.phi_at(ct) +
                           resid.values[j] * std::sqrt(fit.alpha_at(ct)));
    if (arg == 0.0) continue;
    acc += w * std::log(arg);
    wsum += w;
  }
  if (wsum <= 0.0) {
    throw std::invalid_argument("lyapunov_local: empty effective window");
  }
  return acc / wsum;
}

XiEstimate xi_measure(const DarParams& params, const AsymptoticCov& cov) {
  if (cov.sigma_singular || !(cov.sigma_hat > 0.0)) {
    throw std::invalid_argument("xi_measure: singular phi block");
  }
  if (cov.omega_singular || cov.omega_hat.nearly_singular()) {
    throw std::invalid_argument("xi_measure: singular (omega, alpha) block");
  }
  XiEstimate out;
  out.xi = params.phi * params.phi + params.alpha;
  Sym2 inv = cov.omega_hat.inverse();
  out.variance = 4.0 * params.phi * params.phi / cov.sigma_hat +
                 cov.kappa_hat * inv.a22;
  return out;
}

TestResult xi_wald_test(double xi, double variance, std::size_t T, double xi0,
                        double level) {
  if (!(variance > 0.0)) {
    throw std::invalid_argument("xi_wald_test: variance must be positive");
  }
  TestResult r;
  r.name = "xi_wald";
  r.level = level;
  r.statistic = std::sqrt(static_cast<double>(T)) * (xi - xi0) / std::sqrt(variance);
  r.p_value = 1.0 - detail::normal_cdf(r.statistic);  // upper tail
  r.reject = r.p_value < level;
  r.nuisance["xi_hat"] = xi;
  r.nuisance["xi0"] = xi0;
  r.nuisance["variance"] = variance;
  r.nuisance["T"] = static_cast<double>(T);
  return r;
}

std::vector<double> lambda2_sampling(const DarParams& theta_hat, std::size_t T,
                                     NoiseDistribution dist, int reps,
                                     std::uint64_t seed,
                                     const OptimizerOptions& options,
                                     int threads) {
  if (reps < 1) throw std::invalid_argument("lambda2_sampling: reps must be >= 1");
  std::vector<double> out(reps, std::numeric_limits<double>::quiet_NaN());
  detail::parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    std::uint64_t rep_seed = detail::mix_seed(seed, r);
    try {
      DemeanedSeries x = simulate_dar(theta_hat, T, dist, rep_seed);
      FitResult fit = fit_dar(x, options);
      Residuals res = residuals(x, fit.params);
      out[r] = lyapunov_plugin(fit.params, res);
    } catch (const std::exception&) {
      // leave NaN; callers drop failed draws
    }
  });
  std::vector<double> clean;
  clean.reserve(out.size());
  for (double v : out) {
    if (std::isfinite(v)) clean.push_back(v);
  }
  return clean;
}

void local_xi_with_intervals(const LocalFit& fit, double level,
                             std::vector<double>& xi, std::vector<double>& lo,
                             std::vector<double>& hi) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("local_xi_with_intervals: level outside (0, 1)");
  }
  double z = detail::normal_quantile(0.5 * (1.0 + level));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = fit.grid.size();
  xi.assign(n, nan);
  lo.assign(n, nan);
  hi.assign(n, nan);
  double scale = kernel_l2_norm(fit.kernel) /
                 (static_cast<double>(fit.n_obs) * fit.bandwidth.b);
  for (std::size_t i = 0; i < n; ++i) {
    if (!fit.params_at[i]) continue;
    const DarParams& p = *fit.params_at[i];
    const AsymptoticCov& cov = fit.cov_at[i];
    xi[i] = p.phi * p.phi + p.alpha;
    if (cov.sigma_singular || cov.omega_singular || !(cov.kappa_hat > 0.0)) continue;
    Sym2 inv = cov.omega_hat.inverse();
    double v = 4.0 * p.phi * p.phi / cov.sigma_hat + cov.kappa_hat * inv.a22;
    double half = z * std::sqrt(v * scale);
    lo[i] = xi[i] - half;
    hi[i] = xi[i] + half;
  }
}

}  // namespace tvdar
