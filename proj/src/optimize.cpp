#include "angsurf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace angsurf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  NelderMeadResult result;
  std::size_t evaluations = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evaluations;
    const double f = objective(x);
    return std::isfinite(f) ? f : kInf;
  };

  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.push_back({start, eval(start)});
  for (std::size_t i = 0; i < dim && evaluations < options.max_evaluations; ++i) {
    std::vector<double> x = start;
    x[i] += options.initial_step;
    simplex.push_back({x, eval(x)});
  }
  if (simplex.size() < dim + 1) {
    auto best = std::min_element(simplex.begin(), simplex.end(),
                                 [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    result.x = best->x;
    result.value = best->f;
    result.evaluations = evaluations;
    return result;
  }

  auto blend = [dim](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  while (evaluations < options.max_evaluations) {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double f_best = simplex.front().f;
    const double f_worst = simplex.back().f;
    double diameter = 0.0;
    for (std::size_t v = 1; v <= dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i) {
        diameter = std::max(diameter, std::fabs(simplex[v].x[i] - simplex[0].x[i]));
      }
    }
    if (std::isfinite(f_worst) &&
        std::fabs(f_worst - f_best) <= options.f_tolerance * (std::fabs(f_best) + 1e-30)) {
      result.converged = true;
      break;
    }
    if (diameter <= options.x_tolerance) {
      result.converged = std::isfinite(f_best);
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t v = 0; v < dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(dim);
    }
    Vertex& worst = simplex.back();
    const std::vector<double> reflected = blend(centroid, worst.x, -1.0);
    const double f_reflected = eval(reflected);
    if (f_reflected < simplex.front().f) {
      const std::vector<double> expanded = blend(centroid, worst.x, -2.0);
      const double f_expanded = evaluations < options.max_evaluations ? eval(expanded) : kInf;
      if (f_expanded < f_reflected) {
        worst = {expanded, f_expanded};
      } else {
        worst = {reflected, f_reflected};
      }
      continue;
    }
    if (f_reflected < simplex[dim - 1].f) {
      worst = {reflected, f_reflected};
      continue;
    }
    const bool outside = f_reflected < worst.f;
    const std::vector<double> contracted =
        outside ? blend(centroid, reflected, 0.5) : blend(centroid, worst.x, 0.5);
    if (evaluations >= options.max_evaluations) break;
    const double f_contracted = eval(contracted);
    if (f_contracted < std::min(f_reflected, worst.f)) {
      worst = {contracted, f_contracted};
      continue;
    }
    // Shrink towards the best vertex.
    for (std::size_t v = 1; v <= dim && evaluations < options.max_evaluations; ++v) {
      simplex[v].x = blend(simplex[0].x, simplex[v].x, 0.5);
      simplex[v].f = eval(simplex[v].x);
    }
  }

  auto best = std::min_element(simplex.begin(), simplex.end(),
                               [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  result.x = best->x;
  result.value = best->f;
  result.evaluations = evaluations;
  return result;
}

}  // namespace angsurf
