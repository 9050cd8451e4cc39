#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace angsurf {

struct NelderMeadOptions {
  std::size_t max_evaluations = 500;
  double f_tolerance = 1e-10;  // relative spread of simplex values
  double x_tolerance = 1e-8;   // simplex diameter
  double initial_step = 0.5;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Derivative-free Nelder-Mead simplex minimization (standard coefficients
/// 1, 2, 1/2, 1/2). Non-finite objective values are treated as +infinity, so an
/// objective may return infinity to mark points outside the feasible set.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace angsurf
