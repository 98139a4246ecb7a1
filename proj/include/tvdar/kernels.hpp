#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tvdar/core.hpp"

namespace tvdar {

// Localizing kernels used by every kernel-weighted estimator.
//
// rectangular_asymmetric is the indicator of (-1, 0]: evaluated half-open at
// the left endpoint so that with b = n/T the nonzero weights at c = t0/T are
// exactly the trailing n-observation window ending at t0. epanechnikov is
// 1.5*(1 - (2u)^2) on [-1/2, 1/2].
enum class KernelKind { rectangular_asymmetric, epanechnikov };

struct KernelSpec {
  KernelKind kind = KernelKind::epanechnikov;

  std::pair<double, double> support() const;
  const char* name() const;
};

// Bandwidth as a fraction of the sample, b in (0, 1].
struct Bandwidth {
  double b;

  explicit Bandwidth(double b_in);
  std::size_t equivalent_window(std::size_t T) const;
  static Bandwidth from_window(std::size_t n, std::size_t T);
};

double kernel_weight(KernelSpec spec, double u);

// Closed-form integral of K^2 over the support (1.2 for epanechnikov, 1 for
// the rectangular kernel); enters the local asymptotic variance.
double kernel_l2_norm(KernelSpec spec);

struct KernelWeights {
  std::vector<double> w;   // w[t-1] = K((t/T - c)/b), t = 1..T
  double sum = 0.0;        // normalization constant used downstream
  std::size_t nonzero = 0;
};

KernelWeights weights_at(KernelSpec spec, Bandwidth b, TimePoint c, std::size_t T);

// The local-estimation theory wants T*b^3 -> 0; flag bandwidths where the
// finite-sample proxy T*b^3 exceeds 0.1. Returns true when admissible.
bool bandwidth_admissible(std::size_t T, Bandwidth b, double* tb3_out = nullptr);

}  // namespace tvdar
