#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's estimator code paths.

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline double beta_pdf(double w, double p, double q) {
  return boost::math::pdf(boost::math::beta_distribution<double>(p, q), w);
}

inline double beta_cdf(double w, double p, double q) { return boost::math::ibeta(p, q, w); }

template <class F>
double integrate(F f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, 1e-13);
}

template <class F>
double integrate_smooth(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

struct Mixture {
  std::vector<double> weights;
  std::vector<double> p;
  std::vector<double> q;
  double theta = 0.0;

  double density(double w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * beta_pdf(w, p[i], q[i]);
    return s;
  }
  double cdf(double w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * beta_cdf(w, p[i], q[i]);
    return s;
  }
};

/// Direct transcription of the estimator: Gaussian kernel weights (NW, or
/// local-linear via the moment sums), theta = (1/2)/sum(pi W), beta shapes.
inline Mixture mixture(const std::vector<double>& xs, const std::vector<double>& ws, double x, double b,
                       double nu, double tau, bool local_linear = false) {
  const std::size_t n = xs.size();
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (x - xs[i]) / b;
    k[i] = std::exp(-0.5 * u * u) / (b * std::sqrt(2.0 * std::numbers::pi));
  }
  Mixture m;
  m.weights.resize(n);
  if (!local_linear) {
    double total = 0.0;
    for (double v : k) total += v;
    for (std::size_t i = 0; i < n; ++i) m.weights[i] = k[i] / total;
  } else {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = xs[i] - x;
      s0 += k[i] / n;
      s1 += d * k[i] / n;
      s2 += d * d * k[i] / n;
    }
    for (std::size_t i = 0; i < n; ++i) {
      m.weights[i] = (s2 - s1 * (xs[i] - x)) * k[i] / (n * (s2 * s0 - s1 * s1));
    }
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += m.weights[i] * ws[i];
  m.theta = 0.5 / mean;
  for (std::size_t i = 0; i < n; ++i) {
    m.p.push_back(nu * ws[i] * m.theta + tau);
    m.q.push_back(nu * (1.0 - ws[i] * m.theta) + tau);
  }
  return m;
}

}  // namespace oracle
