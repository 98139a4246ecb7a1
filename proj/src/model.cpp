#include "tvdar/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "tvdar/math.hpp"
#include "tvdar/stability.hpp"

namespace tvdar {

namespace {

constexpr double kExplosionGuard = 1e150;
const double kSqrt3 = std::sqrt(3.0);

}  // namespace

double NoiseDistribution::density(double x) const {
  switch (kind) {
    case NoiseKind::gaussian_standard:
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    case NoiseKind::uniform_pm1:
      return (x >= -1.0 && x <= 1.0) ? 0.5 : 0.0;
    case NoiseKind::uniform_standardized:
      return (x >= -kSqrt3 && x <= kSqrt3) ? 0.5 / kSqrt3 : 0.0;
  }
  throw std::logic_error("NoiseDistribution: unknown kind");
}

double NoiseDistribution::variance() const {
  switch (kind) {
    case NoiseKind::gaussian_standard:
      return 1.0;
    case NoiseKind::uniform_pm1:
      return 1.0 / 3.0;
    case NoiseKind::uniform_standardized:
      return 1.0;
  }
  throw std::logic_error("NoiseDistribution: unknown kind");
}

std::pair<double, double> NoiseDistribution::quadrature_range() const {
  switch (kind) {
    case NoiseKind::gaussian_standard:
      return {-12.0, 12.0};
    case NoiseKind::uniform_pm1:
      return {-1.0, 1.0};
    case NoiseKind::uniform_standardized:
      return {-kSqrt3, kSqrt3};
  }
  throw std::logic_error("NoiseDistribution: unknown kind");
}

const char* NoiseDistribution::name() const {
  switch (kind) {
    case NoiseKind::gaussian_standard:
      return "gaussian";
    case NoiseKind::uniform_pm1:
      return "uniform_pm1";
    case NoiseKind::uniform_standardized:
      return "uniform_standardized";
  }
  return "?";
}

NoiseDistribution NoiseDistribution::from_name(const std::string& name) {
  if (name == "gaussian") return {NoiseKind::gaussian_standard};
  if (name == "uniform_pm1") return {NoiseKind::uniform_pm1};
  if (name == "uniform_standardized") return {NoiseKind::uniform_standardized};
  throw std::invalid_argument("unknown noise distribution: " + name);
}

namespace {

// 53-bit uniform in [0, 1).
inline double uniform53(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<double> draw_noise(NoiseDistribution dist, std::size_t n,
                               std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("draw_noise: n must be positive");
  std::uint64_t state = seed;
  std::mt19937_64 rng(detail::splitmix64(state));
  std::vector<double> out(n);
  switch (dist.kind) {
    case NoiseKind::gaussian_standard: {
      // Box-Muller, consuming pairs of 53-bit uniforms.
      for (std::size_t i = 0; i < n; i += 2) {
        double u1 = 1.0 - uniform53(rng);  // (0, 1]
        double u2 = uniform53(rng);
        double r = std::sqrt(-2.0 * std::log(u1));
        out[i] = r * std::cos(2.0 * M_PI * u2);
        if (i + 1 < n) out[i + 1] = r * std::sin(2.0 * M_PI * u2);
      }
      break;
    }
    case NoiseKind::uniform_pm1:
      for (std::size_t i = 0; i < n; ++i) out[i] = 2.0 * uniform53(rng) - 1.0;
      break;
    case NoiseKind::uniform_standardized:
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = kSqrt3 * (2.0 * uniform53(rng) - 1.0);
      }
      break;
  }
  return out;
}

DarParams ParamPath::at(double c) const {
  if (!phi_fn || !omega_fn || !alpha_fn) {
    throw std::invalid_argument("ParamPath: unset parameter function");
  }
  double phi = phi_fn(c);
  double omega = omega_fn(c);
  double alpha = alpha_fn(c);
  if (!std::isfinite(phi) || !std::isfinite(omega) || !std::isfinite(alpha)) {
    throw std::invalid_argument("ParamPath: non-finite value at c = " + std::to_string(c));
  }
  return DarParams(phi, omega, alpha);  // enforces omega > 0, alpha >= 0
}

ParamPath ParamPath::constant(const DarParams& p) {
  return ParamPath{[phi = p.phi](double) { return phi; },
                   [omega = p.omega](double) { return omega; },
                   [alpha = p.alpha](double) { return alpha; }};
}

ParamPath ParamPath::linear(const DarParams& p0, const DarParams& p1) {
  auto lerp = [](double a, double b) {
    return [a, b](double c) { return a + (b - a) * c; };
  };
  return ParamPath{lerp(p0.phi, p1.phi), lerp(p0.omega, p1.omega),
                   lerp(p0.alpha, p1.alpha)};
}

ParamPath ParamPath::piecewise_linear(std::vector<double> c,
                                      std::vector<double> phi,
                                      std::vector<double> omega,
                                      std::vector<double> alpha) {
  if (c.empty() || c.size() != phi.size() || c.size() != omega.size() ||
      c.size() != alpha.size()) {
    throw std::invalid_argument("ParamPath::piecewise_linear: knot length mismatch");
  }
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (!(c[i - 1] < c[i])) {
      throw std::invalid_argument("ParamPath::piecewise_linear: knots must increase");
    }
  }
  auto interp = [c](std::vector<double> v) {
    return [c, v = std::move(v)](double x) {
      if (x <= c.front()) return v.front();
      if (x >= c.back()) return v.back();
      std::size_t hi = 1;
      while (c[hi] < x) ++hi;
      double frac = (x - c[hi - 1]) / (c[hi] - c[hi - 1]);
      return v[hi - 1] + frac * (v[hi] - v[hi - 1]);
    };
  };
  return ParamPath{interp(std::move(phi)), interp(std::move(omega)),
                   interp(std::move(alpha))};
}

std::vector<double> simulate_path(const ParamPath& path,
                                  std::span<const double> noise, std::size_t T) {
  if (T < 2) throw std::invalid_argument("simulate_path: T must be >= 2");
  if (noise.size() < T) {
    throw std::invalid_argument("simulate_path: need at least T noise draws");
  }
  std::size_t burn = noise.size() - T;
  double c0 = 1.0 / static_cast<double>(T);
  std::vector<double> out;
  out.reserve(T);
  double x = 0.0;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    double c = i < burn ? c0
                        : static_cast<double>(i - burn + 1) / static_cast<double>(T);
    DarParams p = path.at(c);
    x = p.phi * x + noise[i] * std::sqrt(p.omega + p.alpha * x * x);
    if (!(std::fabs(x) < kExplosionGuard)) {
      throw explosion_error(i, "simulate_path: path exploded at step " +
                                   std::to_string(i + 1) + " (|x| >= 1e150)");
    }
    if (i >= burn) out.push_back(x);
  }
  return out;
}

namespace {

void check_stationarity(const DarParams& p, NoiseDistribution dist) {
  if (p.phi == 0.0 && p.alpha == 0.0) return;  // lambda undefined, noise-only
  double lambda = lyapunov_quadrature(p.phi, p.alpha, dist);
  if (lambda >= 0.0) {
    warn("simulate_dar: Lyapunov exponent " + std::to_string(lambda) +
         " is nonnegative; the requested process is not strictly stationary");
  }
}

}  // namespace

DemeanedSeries simulate_dar(const DarParams& params, std::size_t T,
                            NoiseDistribution dist, std::uint64_t seed,
                            std::size_t burn_in) {
  check_stationarity(params, dist);
  auto noise = draw_noise(dist, burn_in + T, seed);
  return DemeanedSeries::from_values(
      simulate_path(ParamPath::constant(params), noise, T));
}

DemeanedSeries simulate_tvdar(const ParamPath& path, std::size_t T,
                              NoiseDistribution dist, std::uint64_t seed,
                              std::size_t burn_in) {
  if (T < 2) throw std::invalid_argument("simulate_tvdar: T must be >= 2");
  // Validate the path on the grid it will be evaluated on.
  for (std::size_t t = 1; t <= T; ++t) {
    path.at(static_cast<double>(t) / static_cast<double>(T));
  }
  auto noise = draw_noise(dist, burn_in + T, seed);
  return DemeanedSeries::from_values(simulate_path(path, noise, T));
}

}  // namespace tvdar
