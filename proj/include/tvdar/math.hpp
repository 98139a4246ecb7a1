#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

// Small numeric toolbox shared by the estimation and testing modules.
// Everything in here is deterministic and allocation-light.

namespace tvdar::detail {

// Standard normal CDF and its inverse. The inverse uses a rational
// approximation refined by one Halley step, accurate to ~1e-14.
double normal_cdf(double x);
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi_squared_sf(double x, int df);

// Adaptive Simpson quadrature with absolute tolerance. The integrand must be
// finite at every evaluated point; callers are responsible for splitting at
// interior singularities first.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth = 55);

// splitmix64 step; also used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream);

// Compensated mean, plain variance (denominator n), and order statistics.
double mean(std::span<const double> v);
double variance(std::span<const double> v);  // denominator n
double quantile(std::span<const double> v, double p);  // type-7, copies + sorts
double median(std::span<const double> v);
double interquartile_range(std::span<const double> v);

// Symmetric 2x2 matrix, enough linear algebra for the (omega, alpha) block.
struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double det() const { return a11 * a22 - a12 * a12; }
  bool nearly_singular() const;
  Sym2 inverse() const;  // caller checks nearly_singular()
};

// Runs body(i) for i in [0, n). With threads <= 1 this is a plain loop;
// otherwise indices are striped across workers. The body must only write to
// per-index slots so the result does not depend on scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& body);

// Default worker count: TVDAR_THREADS env var, else hardware concurrency.
int default_threads();

}  // namespace tvdar::detail
