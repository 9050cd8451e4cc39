#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "angsurf/angular_estimator.hpp"

namespace angsurf {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

// ---------------------------------------------------------------------------
// Exact angular densities
// ---------------------------------------------------------------------------

/// Logistic angular density, evaluated in log space. alpha = 1 gives h = 0
/// (all mass at the vertices).
double logistic_density(double w, double alpha);

/// Dirichlet angular density with shapes (a, b), evaluated in log space.
double dirichlet_density(double w, double a, double b);

/// Closed-form dependence functionals of the logistic model.
class LogisticClosedForms {
 public:
  explicit LogisticClosedForms(double alpha);

  double alpha() const noexcept { return alpha_; }
  double pickands(double w) const;
  double extremal_coefficient() const noexcept;
  double bev(double y1, double y2) const;
  /// H([0, w]) on the open interval; vertex masses excluded for alpha = 1.
  double angular_cdf(double w) const;

 private:
  double alpha_;
};

LogisticClosedForms logistic_closed_forms(double alpha);

// ---------------------------------------------------------------------------
// Conditional models
// ---------------------------------------------------------------------------

enum class LinkKind { probit_identity, probit_square, identity, exp, constant, tabulated };

/// Maps a covariate to a model parameter. `tabulated` interpolates linearly
/// between (x, value) knots and is constant beyond them.
struct LinkFunction {
  LinkKind kind = LinkKind::identity;
  double constant = 0.0;
  std::vector<std::pair<double, double>> table;

  double operator()(double x) const;

  static LinkFunction probit_identity() { return {LinkKind::probit_identity, 0.0, {}}; }
  static LinkFunction probit_square() { return {LinkKind::probit_square, 0.0, {}}; }
  static LinkFunction identity() { return {LinkKind::identity, 0.0, {}}; }
  static LinkFunction exponential() { return {LinkKind::exp, 0.0, {}}; }
  static LinkFunction fixed(double value) { return {LinkKind::constant, value, {}}; }
  static LinkFunction tabulated(std::vector<std::pair<double, double>> knots);
};

enum class ModelFamily { logistic, dirichlet };

struct ModelParameters {
  double first;   // alpha (logistic) or a (Dirichlet)
  double second;  // unused (logistic) or b (Dirichlet)
};

/// Covariate-indexed logistic (alpha link) or Dirichlet (a, b links) model.
struct ConditionalModel {
  std::string name;
  ModelFamily family = ModelFamily::logistic;
  LinkFunction first;
  LinkFunction second;
  Interval domain;

  /// Parameters at x; throws DomainError if x is outside the domain or the
  /// link leaves the parameter space.
  ModelParameters parameters(double x) const;
  double density(double w, double x) const;
  /// Checks parameter validity on a fine grid over the domain.
  void validate() const;
};

double model_density(double w, double x, const ConditionalModel& model);

/// alpha_x = Phi(x) on [Phi^-1(0.2), Phi^-1(0.4)].
ConditionalModel logistic_model();
/// alpha_x = Phi(x^2) on [-3, 3].
ConditionalModel logistic_square_model();
/// (a_x, b_x) = (x, x) on [0.8, 4].
ConditionalModel symmetric_dirichlet_model();
/// (a_x, b_x) = (x, 100) on [0.5, 2].
ConditionalModel asymmetric_dirichlet_model();
/// Constant alpha over `domain`.
ConditionalModel stationary_logistic_model(double alpha, Interval domain = {0.0, 1.0});

/// "logistic", "logistic-sq", "sdir", "adir".
ConditionalModel model_by_name(std::string_view name);

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

enum class CovariateScheme { equally_spaced, uniform_random };

std::vector<double> covariate_grid_sampler(Interval domain, std::size_t n, CovariateScheme scheme,
                                           std::uint64_t seed);

/// One pseudo-angle per covariate, drawn from h_x by inverse-CDF sampling on a
/// 4096-point grid equally spaced in logit(w) over [1e-12, 1 - 1e-12]
/// (cumulative trapezoid, renormalized, linear interpolation in logit(w)).
AngleSample sample_angles(const ConditionalModel& model, std::span<const double> x_values,
                          std::uint64_t seed);

/// Pairs with standard Frechet margins from the bivariate logistic extreme
/// value distribution, one pair per entry of `alphas` (Marshall-Olkin
/// construction with a positive stable mixing variable).
std::vector<std::pair<double, double>> sample_logistic_pairs(std::span<const double> alphas,
                                                             std::uint64_t seed);

}  // namespace angsurf
