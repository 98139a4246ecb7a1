#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvdar/estimation.hpp"
#include "tvdar/model.hpp"

namespace tvdar {

enum class Target { phi, omega, alpha, lambda2, xi };

const char* target_name(Target t);
Target target_from_name(const std::string& name);
std::vector<Target> all_targets();

// Gaussian-kernel density estimate on an automatic grid.
struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  std::vector<double> samples;  // the underlying estimates, sorted

  // Location of the density peak (grid argmax with parabolic refinement).
  double mode() const;
  double trapezoid_integral() const;
};

// Default bandwidth: Silverman's 0.9 min(sd, IQR/1.34) n^{-1/5}.
DensityEstimate kde(std::vector<double> samples,
                    std::optional<double> bandwidth = std::nullopt);

struct ExperimentConfig {
  DarParams theta0{0.7, 0.01, 0.5};
  std::vector<std::size_t> T_values{50, 100};
  int reps = 4000;
  NoiseDistribution noise{};
  std::uint64_t seed = 1;
  std::vector<Target> targets = all_targets();
  std::size_t burn_in = kDefaultBurnIn;
  OptimizerOptions optimizer{};
  int threads = 1;
};

struct ExperimentResult {
  // densities[T][target]
  std::map<std::size_t, std::map<Target, DensityEstimate>> densities;
  std::map<std::size_t, int> failed_reps;
  bool flagged = false;  // some T lost >= 1% of its replications
};

// Sampling densities of the estimators by repeated simulate-and-refit.
// Per-replication seeds are split deterministically from the master seed
// (mix_seed(mix_seed(seed, T), rep)), so runs parallelize without shared
// state and reproduce bit-identically at any thread count.
ExperimentResult run_estimator_density_experiment(const ExperimentConfig& config);

// lambda(phi, alpha) over a parameter grid: closed form for U[-1, 1] noise,
// quadrature otherwise. The alpha = 0 column is ln|phi|, with the (0, 0)
// cell left as NaN (undefined).
std::vector<std::vector<double>> lyapunov_surface(
    const std::vector<double>& phi_grid, const std::vector<double>& alpha_grid,
    NoiseDistribution dist);

}  // namespace tvdar
