#include "tvdar/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace tvdar {

std::pair<double, double> KernelSpec::support() const {
  switch (kind) {
    case KernelKind::rectangular_asymmetric:
      return {-1.0, 0.0};
    case KernelKind::epanechnikov:
      return {-0.5, 0.5};
  }
  throw std::logic_error("KernelSpec: unknown kind");
}

const char* KernelSpec::name() const {
  switch (kind) {
    case KernelKind::rectangular_asymmetric:
      return "rectangular_asymmetric";
    case KernelKind::epanechnikov:
      return "epanechnikov";
  }
  return "?";
}

Bandwidth::Bandwidth(double b_in) : b(b_in) {
  if (!(b > 0.0 && b <= 1.0)) {
    throw std::invalid_argument("Bandwidth: b must lie in (0, 1]");
  }
}

std::size_t Bandwidth::equivalent_window(std::size_t T) const {
  double n = std::round(b * static_cast<double>(T));
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

Bandwidth Bandwidth::from_window(std::size_t n, std::size_t T) {
  if (n == 0 || T == 0 || n > T) {
    throw std::invalid_argument("Bandwidth::from_window: need 1 <= n <= T");
  }
  return Bandwidth(static_cast<double>(n) / static_cast<double>(T));
}

double kernel_weight(KernelSpec spec, double u) {
  if (!std::isfinite(u)) throw std::invalid_argument("kernel_weight: u must be finite");
  switch (spec.kind) {
    case KernelKind::rectangular_asymmetric:
      return (u > -1.0 && u <= 0.0) ? 1.0 : 0.0;
    case KernelKind::epanechnikov: {
      if (u < -0.5 || u > 0.5) return 0.0;
      double v = 2.0 * u;
      return 1.5 * (1.0 - v * v);
    }
  }
  throw std::logic_error("kernel_weight: unknown kind");
}

double kernel_l2_norm(KernelSpec spec) {
  switch (spec.kind) {
    case KernelKind::rectangular_asymmetric:
      return 1.0;
    case KernelKind::epanechnikov:
      return 1.2;
  }
  throw std::logic_error("kernel_l2_norm: unknown kind");
}

KernelWeights weights_at(KernelSpec spec, Bandwidth b, TimePoint c, std::size_t T) {
  if (T < 2) throw std::invalid_argument("weights_at: T must be >= 2");
  KernelWeights out;
  out.w.resize(T);
  for (std::size_t t = 1; t <= T; ++t) {
    double u = (static_cast<double>(t) / static_cast<double>(T) - c.c) / b.b;
    double w = kernel_weight(spec, u);
    out.w[t - 1] = w;
    if (w > 0.0) {
      out.sum += w;
      ++out.nonzero;
    }
  }
  if (out.nonzero == 0) {
    throw std::invalid_argument("weights_at: empty effective window at c = " +
                                std::to_string(c.c));
  }
  return out;
}

bool bandwidth_admissible(std::size_t T, Bandwidth b, double* tb3_out) {
  double tb3 = static_cast<double>(T) * b.b * b.b * b.b;
  if (tb3_out) *tb3_out = tb3;
  return tb3 <= 0.1;
}

}  // namespace tvdar
