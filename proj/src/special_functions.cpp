#include "angsurf/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "angsurf/error.hpp"

namespace angsurf {

namespace {

constexpr int kMaxFractionTerms = 300;
constexpr double kFractionTolerance = 1e-14;
constexpr double kTiny = 1e-300;

void check_shapes(BetaParams params, const char* where) {
  if (!params.valid()) {
    throw DomainError(std::string(where) + ": beta shapes must be positive and finite (p=" +
                      std::to_string(params.p) + ", q=" + std::to_string(params.q) + ")");
  }
}

// Continued fraction for I_w(p,q); converges quickly for w < p/(p+q).
double beta_fraction(double w, double p, double q) {
  const double qab = p + q;
  const double qap = p + 1.0;
  const double qam = p - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * w / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxFractionTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (q - m) * w / ((qam + m2) * (p + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(p + m) * (qab + m) * w / ((p + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kFractionTolerance) return h;
  }
  throw NumericError("reg_inc_beta: continued fraction did not converge for w=" +
                     std::to_string(w) + ", p=" + std::to_string(p) + ", q=" + std::to_string(q));
}

}  // namespace

bool BetaParams::valid() const noexcept {
  return std::isfinite(p) && std::isfinite(q) && p > 0.0 && q > 0.0;
}

double log_beta_function(double p, double q) {
  return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
}

double log_beta_density(double w, BetaParams params) {
  check_shapes(params, "beta_density");
  if (!(w > 0.0 && w < 1.0)) {
    throw DomainError("beta_density: w must lie in (0,1), got " + std::to_string(w));
  }
  return (params.p - 1.0) * std::log(w) + (params.q - 1.0) * std::log1p(-w) -
         log_beta_function(params.p, params.q);
}

double beta_density(double w, BetaParams params) {
  return std::exp(log_beta_density(w, params));
}

double reg_inc_beta(double w, BetaParams params) {
  check_shapes(params, "reg_inc_beta");
  if (!(w >= 0.0 && w <= 1.0)) {
    throw DomainError("reg_inc_beta: w must lie in [0,1], got " + std::to_string(w));
  }
  if (w == 0.0) return 0.0;
  if (w == 1.0) return 1.0;
  const double p = params.p;
  const double q = params.q;
  const double log_front =
      p * std::log(w) + q * std::log1p(-w) - log_beta_function(p, q);
  if (w <= p / (p + q)) {
    return std::exp(log_front) * beta_fraction(w, p, q) / p;
  }
  return 1.0 - std::exp(log_front) * beta_fraction(1.0 - w, q, p) / q;
}

double gaussian_kernel(double u, double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw DomainError("gaussian_kernel: bandwidth must be positive, got " + std::to_string(b));
  }
  return normal_pdf(u / b) / b;
}

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: probability must lie in (0,1), got " + std::to_string(p));
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chi_square_sf(double x, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi_square_sf: degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

}  // namespace angsurf
