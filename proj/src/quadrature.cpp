#include "angsurf/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "angsurf/error.hpp"

namespace angsurf {

namespace {

// Kronrod 15-point abscissae and weights on [-1,1]; the odd-indexed nodes
// carry the embedded 7-point Gauss rule.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod_sum = fc * kKronrodWeights[7];
  double gauss_sum = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod_sum += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss_sum += kGaussWeights[j / 2] * pair;
  }
  const double value = kronrod_sum * half;
  const double error = std::fabs((kronrod_sum - gauss_sum) * half);
  return {a, b, value, error};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options) {
  QuadratureResult result;
  if (a == b) {
    result.converged = true;
    return result;
  }
  std::priority_queue<Segment> heap;
  heap.push(kronrod(f, a, b));
  double total = heap.top().value;
  double error = heap.top().error;
  std::size_t intervals = 1;
  auto tolerance = [&] { return std::max(options.abs_tolerance, options.rel_tolerance * std::fabs(total)); };
  while (error > tolerance() && intervals < options.max_intervals) {
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = kronrod(f, worst.a, mid);
    const Segment right = kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed the drift of the incremental updates.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  result.value = total;
  result.error = error;
  result.intervals = intervals;
  result.converged = std::isfinite(total) && error <= tolerance();
  return result;
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& options) {
  const QuadratureResult r = integrate(f, a, b, options);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b << "]: achieved error "
        << r.error << " after " << r.intervals << " intervals";
    throw NumericError(msg.str());
  }
  return r.value;
}

}  // namespace angsurf
