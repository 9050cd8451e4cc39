#include "angsurf/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "angsurf/error.hpp"
#include "angsurf/quadrature.hpp"

namespace angsurf {

namespace {

constexpr double kBoundSlack = 1e-6;
// Per-term accuracy of the incomplete beta continued fraction.
constexpr double kIncBetaAccuracy = 1e-14;

// int_0^w B(u; p, q) du
double integrated_cdf(double w, BetaParams s) {
  if (w <= 0.0) return 0.0;
  const double mean = s.p / (s.p + s.q);
  if (w >= 1.0) return 1.0 - mean;
  return w * reg_inc_beta(w, s) - mean * reg_inc_beta(w, {s.p + 1.0, s.q});
}

// int_0^a u beta(u; p, q) du
double partial_first_moment(double a, BetaParams s) {
  const double mean = s.p / (s.p + s.q);
  if (a <= 0.0) return 0.0;
  if (a >= 1.0) return mean;
  return mean * reg_inc_beta(a, {s.p + 1.0, s.q});
}

}  // namespace

std::string_view to_string(FunctionalKind kind) noexcept {
  switch (kind) {
    case FunctionalKind::pickands: return "pickands";
    case FunctionalKind::extremal_coefficient: return "extremal_coefficient";
    case FunctionalKind::bev: return "bev";
  }
  return "unknown";
}

FunctionalEstimate pickands_hat(double w, const CrossSection& section) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("pickands_hat: w must lie in [0,1], got " + std::to_string(w));
  double sum = 0.0;
  double weight_mass = 0.0;
  for (const auto& c : section.components()) {
    sum += c.weight * integrated_cdf(w, c.shape);
    weight_mass += std::fabs(c.weight);
  }
  FunctionalEstimate est;
  est.x = section.x();
  est.kind = FunctionalKind::pickands;
  est.arg1 = w;
  est.value = 1.0 - w + 2.0 * sum;
  est.quadrature_error = 4.0 * kIncBetaAccuracy * weight_mass;
  const double lower = std::max(w, 1.0 - w);
  est.flagged = est.value < lower - kBoundSlack || est.value > 1.0 + kBoundSlack;
  return est;
}

FunctionalEstimate pickands_hat(double w, double x, const AngularSurface& surface) {
  return pickands_hat(w, surface.at(x));
}

FunctionalEstimate extremal_coeff_hat(const CrossSection& section) {
  FunctionalEstimate a = pickands_hat(0.5, section);
  a.kind = FunctionalKind::extremal_coefficient;
  a.value *= 2.0;
  a.quadrature_error *= 2.0;
  a.flagged = a.value < 1.0 - kBoundSlack || a.value > 2.0 + kBoundSlack;
  return a;
}

FunctionalEstimate extremal_coeff_hat(double x, const AngularSurface& surface) {
  return extremal_coeff_hat(surface.at(x));
}

FunctionalEstimate extremal_coeff_by_quadrature(const CrossSection& section) {
  QuadratureOptions opts;
  opts.abs_tolerance = 1e-10;
  const QuadratureResult r = integrate([&](double u) { return section.cdf(u); }, 0.0, 0.5, opts);
  if (!r.converged) {
    throw NumericError("extremal_coeff_by_quadrature: quadrature did not converge (error " +
                       std::to_string(r.error) + ")");
  }
  FunctionalEstimate est;
  est.x = section.x();
  est.kind = FunctionalKind::extremal_coefficient;
  est.value = 1.0 + 4.0 * r.value;
  est.quadrature_error = 4.0 * r.error;
  est.flagged = est.value < 1.0 - kBoundSlack || est.value > 2.0 + kBoundSlack;
  return est;
}

FunctionalEstimate bev_hat(double y1, double y2, const CrossSection& section) {
  if (!(y1 > 0.0) || !(y2 > 0.0)) {
    throw DomainError("bev_hat: margins must be positive (y1=" + std::to_string(y1) +
                      ", y2=" + std::to_string(y2) + ")");
  }
  // On (0, u*) the maximum is (1-u)/y2, on (u*, 1) it is u/y1.
  const double split = std::isinf(y2) ? 0.0 : (std::isinf(y1) ? 1.0 : y1 / (y1 + y2));
  double low_mass = 0.0;
  double low_moment = 0.0;
  double high_moment = 0.0;
  double weight_mass = 0.0;
  for (const auto& c : section.components()) {
    const double mass = reg_inc_beta(std::clamp(split, 0.0, 1.0), c.shape);
    const double moment = partial_first_moment(split, c.shape);
    const double mean = c.shape.p / (c.shape.p + c.shape.q);
    low_mass += c.weight * mass;
    low_moment += c.weight * moment;
    high_moment += c.weight * (mean - moment);
    weight_mass += std::fabs(c.weight);
  }
  const double low_piece = std::isinf(y2) ? 0.0 : (low_mass - low_moment) / y2;
  const double high_piece = std::isinf(y1) ? 0.0 : high_moment / y1;
  FunctionalEstimate est;
  est.x = section.x();
  est.kind = FunctionalKind::bev;
  est.arg1 = y1;
  est.arg2 = y2;
  est.value = std::exp(-2.0 * (low_piece + high_piece));
  est.quadrature_error =
      est.value * 2.0 * kIncBetaAccuracy * weight_mass * (1.0 / y1 + 1.0 / y2) * 4.0;
  est.flagged = !(est.value > 0.0 && est.value < 1.0);
  return est;
}

FunctionalEstimate bev_hat(double y1, double y2, double x, const AngularSurface& surface) {
  return bev_hat(y1, y2, surface.at(x));
}

}  // namespace angsurf
