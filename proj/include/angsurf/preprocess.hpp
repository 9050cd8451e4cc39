#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "angsurf/angular_estimator.hpp"

namespace angsurf {

/// A dated real series. Timestamps are strictly increasing; two timestamps
/// that both parse as numbers compare numerically, otherwise lexically
/// (ISO dates order correctly).
struct Series {
  std::vector<std::string> timestamps;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  /// Throws DomainError on length mismatch, unordered timestamps or
  /// non-finite values.
  void validate() const;
};

using ReturnSeries = Series;

bool timestamp_less(const std::string& a, const std::string& b);

/// r_t = -(log p_t - log p_{t-1}); a loss is positive.
ReturnSeries neg_log_returns(const Series& prices);

struct AlignedPair {
  std::vector<std::string> timestamps;
  std::vector<double> first;
  std::vector<double> second;
  std::size_t dropped = 0;  // common rows removed for a zero return
  std::string warning;      // set when every common row was removed
};

/// Exact inner join on timestamps, then removal of rows where either return
/// is exactly zero. Throws DomainError when the indices are disjoint.
AlignedPair drop_zero_pairs(const ReturnSeries& s1, const ReturnSeries& s2);

// ---------------------------------------------------------------------------
// GARCH(1,1)
// ---------------------------------------------------------------------------

enum class Innovation { normal, student_t };

std::string_view to_string(Innovation innovation) noexcept;
Innovation parse_innovation(std::string_view text);

struct GarchOptions {
  std::size_t min_length = 100;
  std::size_t max_evaluations = 6000;
};

struct GarchFit {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  Innovation innovation = Innovation::normal;
  double df = 0.0;  // Student-t degrees of freedom (> 2.1); 0 for normal
  double loglik = 0.0;
  std::vector<double> sigma2;
  std::vector<double> residuals;  // r_t / sigma_t
  std::size_t evaluations = 0;
};

/// Conditional variance recursion started at the sample variance.
std::vector<double> garch11_variance(std::span<const double> returns, double omega, double alpha,
                                     double beta);

/// Maximum likelihood fit (no mean term). Parameters are searched as
/// omega = exp(z0), alpha + beta = logistic(z1), alpha / (alpha + beta) =
/// logistic(z2) and df = 2.1 + exp(z3). Throws DomainError for short or
/// constant input and OptimizationError when the search does not converge.
GarchFit garch11_fit(std::span<const double> returns, Innovation innovation,
                     const GarchOptions& options = {});

/// Simulated GARCH(1,1) returns after a burn-in of 500 steps. Student-t
/// innovations are scaled to unit variance.
std::vector<double> simulate_garch11(double omega, double alpha, double beta, std::size_t n,
                                     Innovation innovation, double df, std::uint64_t seed);

struct ArchTest {
  double statistic = 0.0;  // T R^2
  double p_value = 1.0;
  std::size_t lags = 0;
  std::size_t observations = 0;  // T
};

/// Engle's LM test: squared demeaned series regressed on `lags` of itself.
ArchTest engle_arch_lm(std::span<const double> series, std::size_t lags);

// ---------------------------------------------------------------------------
// Transforms and thresholding
// ---------------------------------------------------------------------------

/// -1 / log(rank / (N + 1)) with average ranks for ties.
std::vector<double> empirical_frechet(std::span<const double> series);

struct PolarRecord {
  double x;
  double r;
  double w;
};

struct PseudoPolar {
  std::vector<PolarRecord> records;
};

/// r = y1 + y2, w = y1 / (y1 + y2). Throws DomainError on nonpositive input.
PseudoPolar pseudo_polar(std::span<const double> y1, std::span<const double> y2,
                         std::span<const double> x);

struct QuantileSplineOptions {
  double q = 0.95;
  std::size_t knots = 10;  // interior knots at covariate quantiles
  double tolerance = 1e-8;
  std::size_t max_iterations = 500;  // per smoothing level
};

/// Cubic B-spline quantile curve fitted by majorize-minimize iterations on a
/// smoothed pinball loss whose smoothing is annealed from 1e-2 to 1e-6.
/// Evaluation outside the fitted covariate range uses the boundary value.
class QuantileSpline {
 public:
  double operator()(double x) const;

  double q() const noexcept { return q_; }
  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> coefficients() const noexcept { return coef_; }
  double exceedance_fraction() const noexcept { return exceedance_fraction_; }
  double pinball_loss() const noexcept { return loss_; }
  /// Total variation of the curve over the covariate range, relative to its
  /// mean level; zero for a flat threshold.
  double relative_variation() const noexcept { return relative_variation_; }

  /// B-spline basis values at x (size knots + 4).
  std::vector<double> basis(double x) const;

 private:
  friend QuantileSpline quantile_spline_threshold(std::span<const double>, std::span<const double>,
                                                  const QuantileSplineOptions&);
  double q_ = 0.95;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<double> knots_;  // full knot vector with repeated boundary knots
  std::vector<double> coef_;
  double exceedance_fraction_ = 0.0;
  double loss_ = 0.0;
  double relative_variation_ = 0.0;
};

QuantileSpline quantile_spline_threshold(std::span<const double> x, std::span<const double> r,
                                         const QuantileSplineOptions& options = {});

/// Records with r > threshold(x), as an angle sample (x, w). Throws
/// EmptySampleError when nothing exceeds.
AngleSample exceedance_angles(const PseudoPolar& pp, const std::function<double(double)>& threshold);

// ---------------------------------------------------------------------------
// Synthetic market data
// ---------------------------------------------------------------------------

struct MarketSimulation {
  std::size_t n = 4000;
  /// Logistic dependence path: alpha(t) for t in [0,1].
  std::function<double(double)> alpha = [](double) { return 0.5; };
  double omega = 0.05;
  double garch_alpha = 0.10;
  double garch_beta = 0.85;
  double start_price = 1000.0;
  double return_scale = 0.01;  // GARCH units -> log-price units
};

struct MarketData {
  Series prices1;
  Series prices2;
  std::vector<double> alpha;  // generating alpha per return
};

/// Two price series whose GARCH-standardized returns have a bivariate
/// logistic extreme value copula with parameter alpha(t / n).
MarketData simulate_market(const MarketSimulation& config, std::uint64_t seed);

}  // namespace angsurf
