#include "tvdar/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tvdar/nelder_mead.hpp"

namespace tvdar {

namespace {

// Weighted likelihood terms. idx holds the 0-based response indices t (so the
// term uses x[t] and x[t-1]); weights are strictly positive — zero-weight
// observations are dropped outright, never carried with epsilon weights.
struct Terms {
  std::span<const double> x;
  std::vector<std::size_t> idx;
  std::vector<double> w;
  double wsum = 0.0;
};

Terms unit_terms(std::span<const double> x) {
  Terms t;
  t.x = x;
  t.idx.resize(x.size() - 1);
  t.w.assign(x.size() - 1, 1.0);
  for (std::size_t j = 0; j < t.idx.size(); ++j) t.idx[j] = j + 1;
  t.wsum = static_cast<double>(t.idx.size());
  return t;
}

double terms_loglik(const Terms& terms, double phi, double omega, double alpha) {
  double acc = 0.0;
  for (std::size_t k = 0; k < terms.idx.size(); ++k) {
    std::size_t t = terms.idx[k];
    double lag = terms.x[t - 1];
    double v = omega + alpha * lag * lag;
    double r = terms.x[t] - phi * lag;
    acc += terms.w[k] * (-0.5) * (std::log(v) + r * r / v);
  }
  return acc;
}

constexpr double kLogOmegaBox = 80.0;
constexpr double kLogAlphaLo = -46.0;  // alpha ~ 1e-20, numerically zero
constexpr double kLogAlphaHi = 8.0;

// Out-of-box penalty grows with the excursion so the simplex is pushed back
// toward the feasible region instead of stalling on a flat plateau.
double box_penalty(const std::vector<double>& u, double phi_box) {
  double excess = 0.0;
  excess += std::max(0.0, std::fabs(u[0]) - phi_box);
  excess += std::max(0.0, std::fabs(u[1]) - kLogOmegaBox);
  excess += std::max(0.0, u[2] - kLogAlphaHi) + std::max(0.0, kLogAlphaLo - u[2]);
  return excess;
}

struct MomentStart {
  double phi;
  double log_omega;
  double log_alpha;
};

// OLS AR(1) slope, then weighted least squares of squared innovations on
// (1, x_{t-1}^2) for the variance-equation starting point.
MomentStart moment_start(const Terms& terms) {
  double sxy = 0.0, sxx = 0.0, sx = 0.0, sx2 = 0.0;
  for (std::size_t k = 0; k < terms.idx.size(); ++k) {
    std::size_t t = terms.idx[k];
    double w = terms.w[k];
    sxy += w * terms.x[t] * terms.x[t - 1];
    sxx += w * terms.x[t - 1] * terms.x[t - 1];
    sx += w * terms.x[t];
    sx2 += w * terms.x[t] * terms.x[t];
  }
  double xvar = sx2 / terms.wsum - (sx / terms.wsum) * (sx / terms.wsum);
  double xscale = sx2 / terms.wsum;
  if (!(xvar > 1e-24 * std::max(xscale, 1e-300)) || !(sxx > 0.0)) {
    throw singular_fit_error("fit_dar: degenerate input (effective sample has no variation)");
  }
  double phi0 = std::clamp(sxy / sxx, -1.5, 1.5);

  double s0 = 0.0, s1 = 0.0, s2 = 0.0, b0 = 0.0, b1 = 0.0;
  for (std::size_t k = 0; k < terms.idx.size(); ++k) {
    std::size_t t = terms.idx[k];
    double w = terms.w[k];
    double lag2 = terms.x[t - 1] * terms.x[t - 1];
    double e = terms.x[t] - phi0 * terms.x[t - 1];
    double e2 = e * e;
    s0 += w;
    s1 += w * lag2;
    s2 += w * lag2 * lag2;
    b0 += w * e2;
    b1 += w * e2 * lag2;
  }
  double mse = b0 / s0;
  if (!(mse > 1e-24 * std::max(xscale, 1e-300))) {
    throw singular_fit_error("fit_dar: degenerate input (perfect linear fit, omega -> 0)");
  }
  double det = s0 * s2 - s1 * s1;
  double omega0 = 0.75 * mse;
  double alpha0 = 0.25;
  if (det > 1e-12 * std::max(s0 * s2, 1e-300)) {
    double w_hat = (s2 * b0 - s1 * b1) / det;
    double a_hat = (s0 * b1 - s1 * b0) / det;
    if (std::isfinite(w_hat) && w_hat > 0.0) omega0 = w_hat;
    if (std::isfinite(a_hat)) alpha0 = std::clamp(a_hat, 1e-4, 4.0);
  }
  omega0 = std::clamp(omega0, 1e-8 * mse, 1e8 * mse);
  return {phi0, std::log(omega0), std::log(alpha0)};
}

struct CoreFit {
  DarParams params{0.0, 1.0, 0.0};
  double objective = 0.0;  // maximized weighted log-likelihood
  int iterations = 0;
  bool converged = false;
};

CoreFit fit_terms(const Terms& terms, const OptimizerOptions& options,
                  const std::vector<DarParams>& extra_starts) {
  if (terms.idx.size() + 1 < options.min_observations) {
    throw std::invalid_argument("fit: fewer than min_observations effective observations");
  }
  MomentStart m = moment_start(terms);

  std::vector<std::vector<double>> starts;
  starts.push_back({m.phi, m.log_omega, m.log_alpha});
  std::mt19937_64 rng(detail::mix_seed(options.start_seed, 0));
  auto unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  };
  for (int k = 1; k < options.multistarts; ++k) {
    double dphi = 0.6 * unit();
    double dlw = 2.0 * unit();
    double dla = 3.0 * unit();
    starts.push_back({std::clamp(m.phi + dphi, -options.phi_box, options.phi_box),
                      m.log_omega + dlw,
                      std::clamp(m.log_alpha + dla, kLogAlphaLo, kLogAlphaHi)});
  }
  for (const auto& p : extra_starts) {
    starts.push_back({p.phi, std::log(p.omega),
                      std::log(std::max(p.alpha, std::exp(kLogAlphaLo)))});
  }

  auto objective = [&](const std::vector<double>& u) {
    double excess = box_penalty(u, options.phi_box);
    if (excess > 0.0) return 1e250 * (1.0 + excess);
    return -terms_loglik(terms, u[0], std::exp(u[1]), std::exp(u[2]));
  };

  detail::SimplexOptions sopt;
  sopt.max_iterations = options.max_iterations;
  sopt.x_tolerance = options.tolerance;
  const std::vector<double> step{0.1, 0.5, 0.5};

  CoreFit best;
  bool have_best = false;
  double worst_start_value = -1e300;
  int total_iters = 0;
  for (const auto& s : starts) {
    worst_start_value = std::max(worst_start_value, -objective(s));
    auto r = detail::nelder_mead_minimize(objective, s, step, sopt);
    total_iters += r.iterations;
    if (!have_best || r.value < -best.objective ||
        (r.value == -best.objective && r.converged && !best.converged)) {
      best.objective = -r.value;
      best.params = DarParams(r.x[0], std::exp(r.x[1]), std::exp(r.x[2]));
      best.converged = r.converged;
      have_best = true;
    }
  }
  best.iterations = total_iters;
  if (!have_best) throw singular_fit_error("fit: all starts failed");
  // The simplex never moves uphill, so the optimum must dominate every start.
  if (best.objective < worst_start_value - 1e-6 * (1.0 + std::fabs(best.objective))) {
    throw std::logic_error("fit: optimizer returned a value below an initial point");
  }
  return best;
}

void check_finite(std::span<const double> x, const char* who) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw std::invalid_argument(std::string(who) + ": non-finite value at index " +
                                  std::to_string(i + 1));
    }
  }
}

// Localized covariance shared by the global (unit-weight) and kernel paths.
AsymptoticCov cov_from_terms(const Terms& terms, const DarParams& p, double scale) {
  AsymptoticCov cov;
  double sigma = 0.0;
  Sym2 omega{};
  double eta4 = 0.0;
  for (std::size_t k = 0; k < terms.idx.size(); ++k) {
    std::size_t t = terms.idx[k];
    double w = terms.w[k];
    double lag2 = terms.x[t - 1] * terms.x[t - 1];
    double v = p.omega + p.alpha * lag2;
    double eta = (terms.x[t] - p.phi * terms.x[t - 1]) / std::sqrt(v);
    sigma += w * lag2 / v;
    omega.a11 += w / (v * v);
    omega.a12 += w * lag2 / (v * v);
    omega.a22 += w * lag2 * lag2 / (v * v);
    eta4 += w * eta * eta * eta * eta;
  }
  double norm = terms.wsum;
  cov.sigma_hat = sigma / norm;
  cov.omega_hat = Sym2{omega.a11 / norm, omega.a12 / norm, omega.a22 / norm};
  cov.kappa_hat = eta4 / norm - 1.0;

  if (cov.sigma_hat > 1e-300) {
    cov.se_phi = std::sqrt(scale / cov.sigma_hat);
  } else {
    cov.sigma_singular = true;
  }
  if (!cov.omega_hat.nearly_singular() && cov.kappa_hat > 0.0) {
    Sym2 inv = cov.omega_hat.inverse();
    cov.se_omega = std::sqrt(cov.kappa_hat * inv.a11 * scale);
    cov.se_alpha = std::sqrt(cov.kappa_hat * inv.a22 * scale);
  } else {
    cov.omega_singular = true;
  }
  return cov;
}

}  // namespace

double qml_loglik(std::span<const double> x, const DarParams& params) {
  if (x.size() < 2) throw std::invalid_argument("qml_loglik: need at least 2 observations");
  check_finite(x, "qml_loglik");
  Terms terms = unit_terms(x);
  return terms_loglik(terms, params.phi, params.omega, params.alpha);
}

double qml_loglik(const DemeanedSeries& x, const DarParams& params) {
  return qml_loglik(std::span<const double>(x.values), params);
}

FitResult fit_dar(std::span<const double> x, const OptimizerOptions& options) {
  if (x.size() < options.min_observations) {
    throw std::invalid_argument("fit_dar: need at least " +
                                std::to_string(options.min_observations) +
                                " observations");
  }
  check_finite(x, "fit_dar");
  Terms terms = unit_terms(x);
  CoreFit core = fit_terms(terms, options, {});
  FitResult out{core.params, core.objective, core.converged, core.iterations,
                cov_from_terms(terms, core.params, 1.0 / static_cast<double>(x.size())),
                x.size()};
  return out;
}

FitResult fit_dar(const DemeanedSeries& x, const OptimizerOptions& options) {
  return fit_dar(std::span<const double>(x.values), options);
}

Residuals residuals(std::span<const double> x, const DarParams& params) {
  if (x.size() < 2) throw std::invalid_argument("residuals: need at least 2 observations");
  check_finite(x, "residuals");
  Residuals out;
  out.values.resize(x.size() - 1);
  for (std::size_t t = 1; t < x.size(); ++t) {
    double v = params.omega + params.alpha * x[t - 1] * x[t - 1];
    out.values[t - 1] = (x[t] - params.phi * x[t - 1]) / std::sqrt(v);
  }
  return out;
}

Residuals residuals(const DemeanedSeries& x, const DarParams& params) {
  return residuals(std::span<const double>(x.values), params);
}

AsymptoticCov asymptotic_cov(std::span<const double> x, const DarParams& params) {
  if (x.size() < 10) throw std::invalid_argument("asymptotic_cov: need at least 10 observations");
  check_finite(x, "asymptotic_cov");
  Terms terms = unit_terms(x);
  return cov_from_terms(terms, params, 1.0 / static_cast<double>(x.size()));
}

AsymptoticCov asymptotic_cov(const DemeanedSeries& x, const DarParams& params) {
  return asymptotic_cov(std::span<const double>(x.values), params);
}

std::size_t LocalFit::estimated_count() const {
  std::size_t n = 0;
  for (const auto& p : params_at) n += p.has_value() ? 1 : 0;
  return n;
}

namespace {

double interpolate_local(const LocalFit& fit, double c,
                         const std::function<double(const DarParams&)>& pick) {
  double prev_c = 0.0, prev_v = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i < fit.grid.size(); ++i) {
    if (!fit.params_at[i]) continue;
    double ci = fit.grid[i].c;
    double vi = pick(*fit.params_at[i]);
    if (c <= ci) {
      if (!have_prev) return vi;  // clamp below
      double frac = (c - prev_c) / (ci - prev_c);
      return prev_v + frac * (vi - prev_v);
    }
    prev_c = ci;
    prev_v = vi;
    have_prev = true;
  }
  if (!have_prev) {
    throw std::runtime_error("LocalFit: no estimated grid points to interpolate");
  }
  return prev_v;  // clamp above
}

}  // namespace

double LocalFit::phi_at(double c) const {
  return interpolate_local(*this, c, [](const DarParams& p) { return p.phi; });
}

double LocalFit::omega_at(double c) const {
  return interpolate_local(*this, c, [](const DarParams& p) { return p.omega; });
}

double LocalFit::alpha_at(double c) const {
  return interpolate_local(*this, c, [](const DarParams& p) { return p.alpha; });
}

LocalFit fit_tvdar(const DemeanedSeries& x, const std::vector<TimePoint>& grid,
                   KernelSpec kernel, Bandwidth b, const LocalFitOptions& options) {
  const std::size_t T = x.size();
  if (T < 2) throw std::invalid_argument("fit_tvdar: need at least 2 observations");
  check_finite(x.values, "fit_tvdar");
  if (grid.empty()) throw std::invalid_argument("fit_tvdar: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i - 1].c < grid[i].c)) {
      throw std::invalid_argument("fit_tvdar: grid must be strictly increasing");
    }
  }
  double tb3 = 0.0;
  if (!bandwidth_admissible(T, b, &tb3)) {
    warn("fit_tvdar: bandwidth fails the T*b^3 check (T*b^3 = " +
         std::to_string(tb3) + " > 0.1); local asymptotics may be biased");
  }

  LocalFit fit;
  fit.grid = grid;
  fit.params_at.resize(grid.size());
  fit.cov_at.resize(grid.size());
  fit.effective_n.assign(grid.size(), 0.0);
  fit.kernel = kernel;
  fit.bandwidth = b;
  fit.n_obs = T;

  const double scale_num = kernel_l2_norm(kernel) /
                           (static_cast<double>(T) * b.b);

  auto fit_point = [&](std::size_t i, const std::vector<DarParams>& extra) {
    KernelWeights kw;
    try {
      kw = weights_at(kernel, b, grid[i], T);
    } catch (const std::invalid_argument&) {
      return;  // empty effective window: point stays unestimated
    }
    Terms terms;
    terms.x = x.values;
    for (std::size_t j = 1; j < T; ++j) {
      if (kw.w[j] > 0.0) {
        terms.idx.push_back(j);
        terms.w.push_back(kw.w[j]);
        terms.wsum += kw.w[j];
      }
    }
    if (terms.idx.size() + 1 < options.min_observations) return;
    try {
      CoreFit core = fit_terms(terms, options, extra);
      fit.params_at[i] = core.params;
      fit.cov_at[i] = cov_from_terms(terms, core.params, scale_num);
      fit.effective_n[i] = kw.sum;
    } catch (const singular_fit_error&) {
      // unestimated
    }
  };

  if (options.threads > 1) {
    detail::parallel_for(grid.size(), options.threads,
                         [&](std::size_t i) { fit_point(i, {}); });
  } else {
    std::optional<DarParams> warm;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::vector<DarParams> extra;
      if (options.warm_start && warm) extra.push_back(*warm);
      fit_point(i, extra);
      if (fit.params_at[i]) warm = fit.params_at[i];
    }
  }
  return fit;
}

Residuals local_residuals(const DemeanedSeries& x, const LocalFit& fit) {
  const std::size_t T = x.size();
  if (fit.estimated_count() == 0) {
    throw std::invalid_argument("local_residuals: fit has no estimated points");
  }
  Residuals out;
  out.values.resize(T - 1);
  for (std::size_t t = 1; t < T; ++t) {
    double c = static_cast<double>(t + 1) / static_cast<double>(T);
    double phi = fit.phi_at(c);
    double v = fit.omega_at(c) + fit.alpha_at(c) * x.values[t - 1] * x.values[t - 1];
    out.values[t - 1] = (x.values[t] - phi * x.values[t - 1]) / std::sqrt(v);
  }
  return out;
}

double local_band_half_width(double level, KernelSpec kernel,
                             double block_variance, std::size_t T, Bandwidth b) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("local_band_half_width: level outside (0, 1)");
  }
  double z = detail::normal_quantile(0.5 * (1.0 + level));
  return z * std::sqrt(kernel_l2_norm(kernel) * block_variance /
                       (static_cast<double>(T) * b.b));
}

LocalBands local_confidence_bands(const LocalFit& fit, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("local_confidence_bands: level outside (0, 1)");
  }
  double z = detail::normal_quantile(0.5 * (1.0 + level));
  LocalBands bands;
  bands.grid = fit.grid;
  bands.level = level;
  std::size_t n = fit.grid.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bands.phi_lo.assign(n, nan);
  bands.phi_hi.assign(n, nan);
  bands.omega_lo.assign(n, nan);
  bands.omega_hi.assign(n, nan);
  bands.alpha_lo.assign(n, nan);
  bands.alpha_hi.assign(n, nan);
  for (std::size_t i = 0; i < n; ++i) {
    if (!fit.params_at[i]) continue;
    const DarParams& p = *fit.params_at[i];
    const AsymptoticCov& cov = fit.cov_at[i];
    if (cov.se_phi) {
      bands.phi_lo[i] = p.phi - z * *cov.se_phi;
      bands.phi_hi[i] = p.phi + z * *cov.se_phi;
    }
    if (cov.se_omega) {
      bands.omega_lo[i] = p.omega - z * *cov.se_omega;
      bands.omega_hi[i] = p.omega + z * *cov.se_omega;
    }
    if (cov.se_alpha) {
      bands.alpha_lo[i] = p.alpha - z * *cov.se_alpha;
      bands.alpha_hi[i] = p.alpha + z * *cov.se_alpha;
    }
  }
  return bands;
}

}  // namespace tvdar
