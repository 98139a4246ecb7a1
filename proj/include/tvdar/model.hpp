#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tvdar/core.hpp"

namespace tvdar {

// Innovation distributions. All are symmetric about zero. gaussian_standard
// and uniform_standardized have unit variance; uniform_pm1 is U[-1, 1]
// (variance 1/3) and is kept because the closed-form Lyapunov exponent is
// stated for it — it is labeled accordingly.
enum class NoiseKind { gaussian_standard, uniform_pm1, uniform_standardized };

struct NoiseDistribution {
  NoiseKind kind = NoiseKind::gaussian_standard;

  double density(double x) const;
  double variance() const;
  bool unit_variance() const { return kind != NoiseKind::uniform_pm1; }
  // Finite interval carrying all but a negligible (< 1e-30) tail mass; for
  // the uniforms this is the exact support.
  std::pair<double, double> quadrature_range() const;
  const char* name() const;

  static NoiseDistribution from_name(const std::string& name);
};

// n i.i.d. draws; the same seed always reproduces the same sequence. The
// generator is self-contained (splitmix-seeded mt19937_64 + Box-Muller /
// 53-bit uniforms), so output does not depend on the standard library's
// distribution implementations.
std::vector<double> draw_noise(NoiseDistribution dist, std::size_t n,
                               std::uint64_t seed);

// Deterministic parameter functions on rescaled time [0, 1].
struct ParamPath {
  std::function<double(double)> phi_fn;
  std::function<double(double)> omega_fn;
  std::function<double(double)> alpha_fn;

  DarParams at(double c) const;  // validates omega > 0, alpha >= 0

  static ParamPath constant(const DarParams& p);
  static ParamPath linear(const DarParams& at0, const DarParams& at1);
  // Piecewise-linear interpolation through (c_i, value_i) knots; c must be
  // strictly increasing and cover [0, 1] after clamping at the ends.
  static ParamPath piecewise_linear(std::vector<double> c,
                                    std::vector<double> phi,
                                    std::vector<double> omega,
                                    std::vector<double> alpha);
};

inline constexpr std::size_t kDefaultBurnIn = 500;

// Runs the recursion x_t = phi(c_t) x_{t-1} + eta_t sqrt(omega(c_t) +
// alpha(c_t) x_{t-1}^2) over the supplied noise and returns the final T
// values; the first noise.size() - T steps are burn-in with the parameters
// frozen at c = 1/T. Exposed so oracles can drive the recursion with a known
// noise sequence. Throws explosion_error if |x| exceeds 1e150.
std::vector<double> simulate_path(const ParamPath& path,
                                  std::span<const double> noise, std::size_t T);

DemeanedSeries simulate_dar(const DarParams& params, std::size_t T,
                            NoiseDistribution dist, std::uint64_t seed,
                            std::size_t burn_in = kDefaultBurnIn);

DemeanedSeries simulate_tvdar(const ParamPath& path, std::size_t T,
                              NoiseDistribution dist, std::uint64_t seed,
                              std::size_t burn_in = kDefaultBurnIn);

}  // namespace tvdar
