#pragma once

#include <cstddef>
#include <functional>

namespace angsurf {

struct QuadratureOptions {
  double abs_tolerance = 1e-8;
  double rel_tolerance = 0.0;
  std::size_t max_intervals = 200;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

/// Globally adaptive 15-point Gauss-Kronrod integration on [a, b]: the interval
/// with the largest error estimate is bisected until the summed estimate meets
/// the tolerance or the interval cap is reached. Nodes never touch the
/// endpoints, so integrable endpoint singularities are tolerated.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

/// As integrate(), but throws NumericError (carrying the achieved error
/// estimate) when the tolerance is not met.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& options = {});

}  // namespace angsurf
