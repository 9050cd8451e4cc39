#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "angsurf/special_functions.hpp"

namespace angsurf {

enum class WeightScheme { nadaraya_watson, local_linear };

std::string_view to_string(WeightScheme scheme) noexcept;
/// Accepts "nw" / "ll" (and the long names).
WeightScheme parse_weight_scheme(std::string_view text);

struct AngleRecord {
  double x;  // covariate
  double w;  // pseudo-angle in (0,1)
};

/// Covariate-indexed pseudo-angles {(X_i, W_i)}. Non-empty; every angle lies
/// strictly inside (0,1) and every covariate is finite.
class AngleSample {
 public:
  explicit AngleSample(const std::vector<AngleRecord>& records);
  AngleSample(std::vector<double> covariates, std::vector<double> angles);

  std::size_t size() const noexcept { return x_.size(); }
  std::span<const double> covariates() const noexcept { return x_; }
  std::span<const double> angles() const noexcept { return w_; }
  AngleRecord operator[](std::size_t i) const { return {x_[i], w_[i]}; }

  double min_covariate() const noexcept;
  double max_covariate() const noexcept;

  AngleSample subset(std::span<const std::size_t> indices) const;

 private:
  void validate() const;

  std::vector<double> x_;
  std::vector<double> w_;
};

/// (b, nu, tau) plus the weight scheme; fully determines an estimate.
struct TuningParams {
  double b = 1.0;    // covariate bandwidth
  double nu = 10.0;  // angular concentration
  double tau = 0.0;  // center adjustment
  WeightScheme weights = WeightScheme::nadaraya_watson;

  /// Throws DomainError unless b > 0, nu > 0 and tau >= 0.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

enum class WeightStatus { ok, kernel_underflow, singular_moments, nonpositive_mean };

struct LocalWeights {
  WeightStatus status = WeightStatus::ok;
  std::vector<double> weights;  // pi_{b,i}(x), sums to 1
  double theta = 0.0;           // (1/2) / sum_i pi_i W_i
  double log_kernel_mass = 0.0; // log sum_i K_b(x - X_i)
  double nearest_distance = 0.0;
};

/// Non-throwing weight computation on raw covariate/angle arrays. Kernel
/// values are evaluated relative to the largest one, so the normalized
/// weights are exact even when every raw kernel value is tiny; the status
/// reports a raw kernel mass below 1e-300 as kernel_underflow.
LocalWeights try_local_weights(std::span<const double> covariates, std::span<const double> angles,
                               double x, double b, WeightScheme scheme);

/// Nadaraya-Watson weights K_b(x - X_i) / sum_j K_b(x - X_j).
std::vector<double> nw_weights(double x, const AngleSample& sample, double b);

/// Local-linear weights n^{-1} {s2 - s1 (X_i - x)} K_b(X_i - x) / (s2 s0 - s1^2).
/// May be negative. Throws NumericError when the moment matrix is singular
/// (for example when all covariates coincide); use Nadaraya-Watson weights then.
std::vector<double> ll_weights(double x, const AngleSample& sample, double b);

std::vector<double> kernel_weights(double x, const AngleSample& sample, double b,
                                   WeightScheme scheme);

/// Moment-constraint correction (1/2) / sum_i pi_i W_i.
double theta_b(const AngleSample& sample, std::span<const double> weights);

// ---------------------------------------------------------------------------
// Conditional density at a fixed covariate
// ---------------------------------------------------------------------------

struct MixtureComponent {
  std::size_t index;  // record index in the sample
  double weight;
  BetaParams shape;
  double log_norm;    // -log B(p, q)
};

/// The estimated conditional angular density h_x at one covariate value: a
/// beta mixture with shapes (nu W_i theta + tau, nu (1 - W_i theta) + tau).
/// Components whose weight is below 1e-17 of the largest are not stored.
class CrossSection {
 public:
  CrossSection(double x, std::vector<double> weights, double theta,
               std::span<const double> angles, double nu, double tau);

  double x() const noexcept { return x_; }
  double theta() const noexcept { return theta_; }
  double nu() const noexcept { return nu_; }
  double tau() const noexcept { return tau_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const MixtureComponent> components() const noexcept { return components_; }

  /// True when any weight is negative (local-linear only); the density may
  /// then dip below zero.
  bool has_negative_weights() const noexcept { return negative_weights_; }

  double density(double w) const;
  double cdf(double w) const;

  /// Density on a grid of angles strictly inside (0,1); out.size() == grid.size().
  void density_on_grid(std::span<const double> grid, std::span<double> out) const;

 private:
  double x_;
  double theta_;
  double nu_;
  double tau_;
  std::vector<double> weights_;
  std::vector<MixtureComponent> components_;
  bool negative_weights_ = false;
};

struct FeasibilityReport {
  bool feasible = true;
  std::size_t violating_index = 0;
  double min_second_shape = 0.0;  // min_i nu (1 - W_i theta) + tau
};

/// Beta shapes are positive iff nu (1 - W_i theta) + tau > 0 for every i.
FeasibilityReport check_shapes(std::span<const double> angles, double theta, double nu, double tau);

/// The angular surface estimator x -> h_x. Immutable; every evaluation is a
/// const, thread-safe operation.
class AngularSurface {
 public:
  AngularSurface(AngleSample sample, TuningParams params);

  const AngleSample& sample() const noexcept { return sample_; }
  const TuningParams& params() const noexcept { return params_; }

  /// Throws NumericError ("x too far from data", singular local-linear
  /// moments, nonpositive weighted mean) or FeasibilityError.
  CrossSection at(double x) const;

  /// Non-throwing feasibility check at x (numeric failures count as infeasible).
  FeasibilityReport feasibility(double x) const;

  double h_hat(double w, double x) const { return at(x).density(w); }
  double H_hat(double w, double x) const { return at(x).cdf(w); }

 private:
  AngleSample sample_;
  TuningParams params_;
};

/// 512 equally spaced angles on [1/1024, 1 - 1/1024].
std::vector<double> standard_angle_grid();

struct SurfaceGrid {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> values;        // row-major: values[i * w.size() + k] = h_{x_i}(w_k)
  std::size_t negative_entries = 0;  // nonzero only under local-linear weights

  double at(std::size_t i, std::size_t k) const { return values[i * w.size() + k]; }
};

/// Evaluates h_x(w) on x_grid x w_grid. Throws FeasibilityError listing every
/// infeasible grid covariate.
SurfaceGrid surface_grid(const AngularSurface& surface, std::span<const double> x_grid,
                         std::span<const double> w_grid, unsigned threads = 1);

}  // namespace angsurf
