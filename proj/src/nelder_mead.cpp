#include "tvdar/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tvdar::detail {

namespace {

double linf_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::fabs(a[i] - b[i]));
  }
  return d;
}

}  // namespace

SimplexResult nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, const std::vector<double>& step,
    const SimplexOptions& options) {
  const std::size_t n = start.size();
  if (n == 0 || step.size() != n) {
    throw std::invalid_argument("nelder_mead_minimize: bad start/step dimensions");
  }

  std::vector<std::vector<double>> verts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) verts[i + 1][i] += step[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = objective(verts[i]);

  // Index-sorted view; ties broken by index so runs are reproducible.
  std::vector<std::size_t> order(n + 1);
  auto resort = [&]() {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (fv[a] != fv[b]) return fv[a] < fv[b];
      return a < b;
    });
  };

  SimplexResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    resort();
    const auto& best = verts[order[0]];
    double spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      spread = std::max(spread, linf_distance(verts[order[i]], best));
    }
    if (spread < options.x_tolerance) {
      result.converged = true;
      break;
    }

    std::size_t worst = order[n];
    std::size_t second_worst = order[n - 1];

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += verts[k][i];
    }
    for (double& ci : centroid) ci /= static_cast<double>(n);

    auto point_along = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = centroid[i] + coef * (centroid[i] - verts[worst][i]);
      }
      return p;
    };

    auto reflected = point_along(1.0);
    double fr = objective(reflected);

    if (fr < fv[order[0]]) {
      auto expanded = point_along(2.0);
      double fe = objective(expanded);
      if (fe < fr) {
        verts[worst] = std::move(expanded);
        fv[worst] = fe;
      } else {
        verts[worst] = std::move(reflected);
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      verts[worst] = std::move(reflected);
      fv[worst] = fr;
    } else {
      bool outside = fr < fv[worst];
      auto contracted = point_along(outside ? 0.5 : -0.5);
      double fc = objective(contracted);
      if (fc < (outside ? fr : fv[worst])) {
        verts[worst] = std::move(contracted);
        fv[worst] = fc;
      } else {
        // Shrink toward the best vertex.
        const auto anchor = verts[order[0]];
        for (std::size_t k = 0; k <= n; ++k) {
          if (k == order[0]) continue;
          for (std::size_t i = 0; i < n; ++i) {
            verts[k][i] = anchor[i] + 0.5 * (verts[k][i] - anchor[i]);
          }
          fv[k] = objective(verts[k]);
        }
      }
    }
  }

  resort();
  result.x = verts[order[0]];
  result.value = fv[order[0]];
  result.iterations = iter;
  return result;
}

}  // namespace tvdar::detail
