#include "tvdar/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tvdar/math.hpp"
#include "tvdar/stability.hpp"

namespace tvdar {

const char* target_name(Target t) {
  switch (t) {
    case Target::phi: return "phi";
    case Target::omega: return "omega";
    case Target::alpha: return "alpha";
    case Target::lambda2: return "lambda2";
    case Target::xi: return "xi";
  }
  return "?";
}

Target target_from_name(const std::string& name) {
  for (Target t : all_targets()) {
    if (name == target_name(t)) return t;
  }
  throw std::invalid_argument("unknown target: " + name);
}

std::vector<Target> all_targets() {
  return {Target::phi, Target::omega, Target::alpha, Target::lambda2, Target::xi};
}

double DensityEstimate::mode() const {
  if (density.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t best = 0;
  for (std::size_t i = 1; i < density.size(); ++i) {
    if (density[i] > density[best]) best = i;
  }
  if (best == 0 || best + 1 == density.size()) return grid[best];
  // Parabolic refinement through the peak and its neighbors.
  double y0 = density[best - 1], y1 = density[best], y2 = density[best + 1];
  double denom = y0 - 2.0 * y1 + y2;
  if (denom >= 0.0) return grid[best];
  double shift = 0.5 * (y0 - y2) / denom;
  double h = grid[1] - grid[0];
  return grid[best] + shift * h;
}

double DensityEstimate::trapezoid_integral() const {
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    acc += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return acc;
}

DensityEstimate kde(std::vector<double> samples, std::optional<double> bandwidth) {
  if (samples.size() < 2) throw std::invalid_argument("kde: need at least 2 samples");
  std::sort(samples.begin(), samples.end());
  if (samples.front() == samples.back()) {
    throw std::invalid_argument("kde: all samples identical");
  }
  double h;
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
    h = *bandwidth;
  } else {
    double sd = std::sqrt(detail::variance(samples));
    double iqr = detail::interquartile_range(samples);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    h = 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
    if (!(h > 0.0)) h = sd;  // iqr degenerate and sd > 0
  }

  constexpr std::size_t kGridSize = 512;
  DensityEstimate out;
  out.bandwidth = h;
  out.grid.resize(kGridSize);
  out.density.assign(kGridSize, 0.0);
  double lo = samples.front() - 3.0 * h;
  double hi = samples.back() + 3.0 * h;
  double step = (hi - lo) / static_cast<double>(kGridSize - 1);
  const double norm =
      1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * M_PI));
  for (std::size_t i = 0; i < kGridSize; ++i) {
    double g = lo + step * static_cast<double>(i);
    out.grid[i] = g;
    double acc = 0.0;
    for (double s : samples) {
      double u = (g - s) / h;
      acc += std::exp(-0.5 * u * u);
    }
    out.density[i] = norm * acc;
  }
  out.samples = std::move(samples);
  return out;
}

ExperimentResult run_estimator_density_experiment(const ExperimentConfig& config) {
  if (config.reps < 1) throw std::invalid_argument("experiment: reps must be >= 1");
  if (config.T_values.empty()) throw std::invalid_argument("experiment: no T values");
  ExperimentResult result;
  const auto reps = static_cast<std::size_t>(config.reps);

  for (std::size_t T : config.T_values) {
    std::uint64_t t_seed = detail::mix_seed(config.seed, T);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::map<Target, std::vector<double>> samples;
    for (Target t : config.targets) samples[t].assign(reps, nan);

    detail::parallel_for(reps, config.threads, [&](std::size_t rep) {
      std::uint64_t rep_seed = detail::mix_seed(t_seed, rep);
      try {
        DemeanedSeries x =
            simulate_dar(config.theta0, T, config.noise, rep_seed, config.burn_in);
        FitResult fit = fit_dar(x, config.optimizer);
        for (Target t : config.targets) {
          double value = nan;
          switch (t) {
            case Target::phi: value = fit.params.phi; break;
            case Target::omega: value = fit.params.omega; break;
            case Target::alpha: value = fit.params.alpha; break;
            case Target::lambda2: {
              Residuals res = residuals(x, fit.params);
              value = lyapunov_plugin(fit.params, res);
              break;
            }
            case Target::xi:
              value = fit.params.phi * fit.params.phi + fit.params.alpha;
              break;
          }
          samples[t][rep] = value;
        }
      } catch (const std::exception&) {
        // failed replication: all targets stay NaN for this rep
      }
    });

    int failed = 0;
    std::map<Target, DensityEstimate> per_target;
    for (Target t : config.targets) {
      std::vector<double> clean;
      clean.reserve(reps);
      for (double v : samples[t]) {
        if (std::isfinite(v)) clean.push_back(v);
      }
      failed = std::max(failed, static_cast<int>(reps - clean.size()));
      per_target[t] = kde(std::move(clean));
    }
    result.failed_reps[T] = failed;
    if (failed * 100 >= config.reps) {
      result.flagged = true;
      warn("experiment: T = " + std::to_string(T) + " lost " +
           std::to_string(failed) + " of " + std::to_string(config.reps) +
           " replications (>= 1%)");
    }
    result.densities[T] = std::move(per_target);
  }
  return result;
}

std::vector<std::vector<double>> lyapunov_surface(
    const std::vector<double>& phi_grid, const std::vector<double>& alpha_grid,
    NoiseDistribution dist) {
  if (phi_grid.empty() || alpha_grid.empty()) {
    throw std::invalid_argument("lyapunov_surface: empty grid");
  }
  std::vector<std::vector<double>> surface(
      phi_grid.size(), std::vector<double>(alpha_grid.size(), 0.0));
  for (std::size_t i = 0; i < phi_grid.size(); ++i) {
    for (std::size_t j = 0; j < alpha_grid.size(); ++j) {
      double phi = phi_grid[i];
      double alpha = alpha_grid[j];
      if (phi == 0.0 && alpha == 0.0) {
        surface[i][j] = std::numeric_limits<double>::quiet_NaN();
      } else if (alpha == 0.0) {
        surface[i][j] = std::log(std::fabs(phi));
      } else if (dist.kind == NoiseKind::uniform_pm1) {
        surface[i][j] = lyapunov_uniform(phi, alpha);
      } else {
        surface[i][j] = lyapunov_quadrature(phi, alpha, dist);
      }
    }
  }
  return surface;
}

}  // namespace tvdar
