#pragma once

#include <functional>
#include <vector>

namespace tvdar::detail {

struct SimplexOptions {
  int max_iterations = 2000;
  // Convergence when every vertex is within this L-infinity distance of the
  // best vertex.
  double x_tolerance = 1e-8;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex minimization (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). All decisions are comparisons of objective values, so the
// trajectory is invariant under positive rescaling of the objective.
SimplexResult nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::vector<double>& start, const std::vector<double>& step,
    const SimplexOptions& options = {});

}  // namespace tvdar::detail
