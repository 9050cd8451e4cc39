#include "angsurf/angular_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "angsurf/error.hpp"
#include "angsurf/parallel.hpp"

namespace angsurf {

namespace {

// Raw kernel mass below this is treated as "too far from the data".
const double kLogMinKernelMass = std::log(1e-300);
// Relative weight below which a mixture component is dropped from sums.
constexpr double kComponentCutoff = 1e-17;

std::string describe(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

}  // namespace

std::string_view to_string(WeightScheme scheme) noexcept {
  return scheme == WeightScheme::nadaraya_watson ? "nw" : "ll";
}

WeightScheme parse_weight_scheme(std::string_view text) {
  if (text == "nw" || text == "nadaraya-watson" || text == "nadaraya_watson") {
    return WeightScheme::nadaraya_watson;
  }
  if (text == "ll" || text == "local-linear" || text == "local_linear") {
    return WeightScheme::local_linear;
  }
  throw ConfigError("unknown weight scheme '" + std::string(text) + "' (expected nw or ll)");
}

// ---------------------------------------------------------------------------
// AngleSample
// ---------------------------------------------------------------------------

AngleSample::AngleSample(const std::vector<AngleRecord>& records) {
  x_.reserve(records.size());
  w_.reserve(records.size());
  for (const auto& r : records) {
    x_.push_back(r.x);
    w_.push_back(r.w);
  }
  validate();
}

AngleSample::AngleSample(std::vector<double> covariates, std::vector<double> angles)
    : x_(std::move(covariates)), w_(std::move(angles)) {
  if (x_.size() != w_.size()) {
    throw DomainError("AngleSample: covariate and angle columns differ in length");
  }
  validate();
}

void AngleSample::validate() const {
  if (x_.empty()) throw EmptySampleError("empty-sample: an angle sample needs at least one record");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i])) {
      throw DomainError("AngleSample: covariate " + std::to_string(i) + " is not finite");
    }
    if (!(w_[i] > 0.0 && w_[i] < 1.0)) {
      throw DomainError("AngleSample: angle " + std::to_string(i) + " = " + describe(w_[i]) +
                        " is not strictly inside (0,1)");
    }
  }
}

double AngleSample::min_covariate() const noexcept { return *std::min_element(x_.begin(), x_.end()); }
double AngleSample::max_covariate() const noexcept { return *std::max_element(x_.begin(), x_.end()); }

AngleSample AngleSample::subset(std::span<const std::size_t> indices) const {
  std::vector<double> x, w;
  x.reserve(indices.size());
  w.reserve(indices.size());
  for (std::size_t i : indices) {
    x.push_back(x_.at(i));
    w.push_back(w_.at(i));
  }
  return AngleSample(std::move(x), std::move(w));
}

void TuningParams::validate() const {
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("bandwidth b must be positive, got " + describe(b));
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be positive, got " + describe(nu));
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("tau must be nonnegative, got " + describe(tau));
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

LocalWeights try_local_weights(std::span<const double> covariates, std::span<const double> angles,
                               double x, double b, WeightScheme scheme) {
  const std::size_t n = covariates.size();
  LocalWeights out;
  out.weights.resize(n);
  double max_exponent = -std::numeric_limits<double>::infinity();
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (x - covariates[i]) / b;
    out.weights[i] = -0.5 * u * u;
    max_exponent = std::max(max_exponent, out.weights[i]);
    nearest = std::min(nearest, std::fabs(x - covariates[i]));
  }
  out.nearest_distance = nearest;
  double scaled_mass = 0.0;
  for (double& k : out.weights) {
    k = std::exp(k - max_exponent);
    scaled_mass += k;
  }
  out.log_kernel_mass =
      max_exponent + std::log(scaled_mass) - std::log(b * std::sqrt(2.0 * std::numbers::pi));
  if (out.log_kernel_mass < kLogMinKernelMass) {
    out.status = WeightStatus::kernel_underflow;
    return out;
  }

  if (scheme == WeightScheme::nadaraya_watson) {
    for (double& k : out.weights) k /= scaled_mass;
  } else {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = covariates[i] - x;
      s0 += out.weights[i];
      s1 += d * out.weights[i];
      s2 += d * d * out.weights[i];
    }
    const double nd = static_cast<double>(n);
    s0 /= nd;
    s1 /= nd;
    s2 /= nd;
    const double det = s2 * s0 - s1 * s1;
    if (!(s2 > 0.0) || !(det > 1e-12 * s2 * s0)) {
      out.status = WeightStatus::singular_moments;
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double d = covariates[i] - x;
      out.weights[i] = (s2 - s1 * d) * out.weights[i] / (nd * det);
    }
  }

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += out.weights[i] * angles[i];
  if (!(mean > 0.0)) {
    out.status = WeightStatus::nonpositive_mean;
    return out;
  }
  out.theta = 0.5 / mean;
  return out;
}

namespace {

void throw_weight_failure(const LocalWeights& lw, double x) {
  switch (lw.status) {
    case WeightStatus::ok:
      return;
    case WeightStatus::kernel_underflow:
      throw NumericError("x too far from data: x=" + describe(x) + " lies " +
                         describe(lw.nearest_distance) +
                         " from the nearest covariate and every kernel mass underflows");
    case WeightStatus::singular_moments:
      throw NumericError("local-linear moment matrix is singular at x=" + describe(x) +
                         " (need at least two distinct covariates with kernel mass); "
                         "use Nadaraya-Watson weights instead");
    case WeightStatus::nonpositive_mean:
      throw NumericError("weighted mean of the angles is not positive at x=" + describe(x) +
                         "; theta_b is undefined");
  }
}

}  // namespace

std::vector<double> kernel_weights(double x, const AngleSample& sample, double b,
                                   WeightScheme scheme) {
  if (!(b > 0.0)) throw DomainError("bandwidth b must be positive, got " + describe(b));
  LocalWeights lw = try_local_weights(sample.covariates(), sample.angles(), x, b, scheme);
  if (lw.status == WeightStatus::nonpositive_mean) return std::move(lw.weights);
  throw_weight_failure(lw, x);
  return std::move(lw.weights);
}

std::vector<double> nw_weights(double x, const AngleSample& sample, double b) {
  return kernel_weights(x, sample, b, WeightScheme::nadaraya_watson);
}

std::vector<double> ll_weights(double x, const AngleSample& sample, double b) {
  return kernel_weights(x, sample, b, WeightScheme::local_linear);
}

double theta_b(const AngleSample& sample, std::span<const double> weights) {
  if (weights.size() != sample.size()) throw DomainError("theta_b: weight vector has the wrong length");
  double mean = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) mean += weights[i] * sample.angles()[i];
  if (!(mean > 0.0)) {
    throw NumericError("theta_b: weighted mean of the angles is not positive (" + describe(mean) + ")");
  }
  return 0.5 / mean;
}

// ---------------------------------------------------------------------------
// CrossSection
// ---------------------------------------------------------------------------

FeasibilityReport check_shapes(std::span<const double> angles, double theta, double nu, double tau) {
  FeasibilityReport report;
  report.min_second_shape = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double q = nu * (1.0 - angles[i] * theta) + tau;
    if (q < report.min_second_shape) report.min_second_shape = q;
    if (!(q > 0.0) && report.feasible) {
      report.feasible = false;
      report.violating_index = i;
    }
  }
  return report;
}

CrossSection::CrossSection(double x, std::vector<double> weights, double theta,
                           std::span<const double> angles, double nu, double tau)
    : x_(x), theta_(theta), nu_(nu), tau_(tau), weights_(std::move(weights)) {
  double largest = 0.0;
  for (double wt : weights_) {
    largest = std::max(largest, std::fabs(wt));
    if (wt < 0.0) negative_weights_ = true;
  }
  const double total_shape = nu + 2.0 * tau;
  const double lgamma_total = std::lgamma(total_shape);
  components_.reserve(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (std::fabs(weights_[i]) < kComponentCutoff * largest) continue;
    const double p = nu * angles[i] * theta + tau;
    const double q = total_shape - p;
    const double log_norm = lgamma_total - std::lgamma(p) - std::lgamma(q);
    components_.push_back({i, weights_[i], {p, q}, log_norm});
  }
}

double CrossSection::density(double w) const {
  if (!(w > 0.0 && w < 1.0)) throw DomainError("density: w must lie in (0,1), got " + describe(w));
  const double lw = std::log(w);
  const double l1w = std::log1p(-w);
  double sum = 0.0;
  for (const auto& c : components_) {
    sum += c.weight * std::exp((c.shape.p - 1.0) * lw + (c.shape.q - 1.0) * l1w + c.log_norm);
  }
  return sum;
}

double CrossSection::cdf(double w) const {
  if (!(w > 0.0)) return 0.0;
  if (!(w < 1.0)) return 1.0;
  double sum = 0.0;
  for (const auto& c : components_) sum += c.weight * reg_inc_beta(w, c.shape);
  return sum;
}

void CrossSection::density_on_grid(std::span<const double> grid, std::span<double> out) const {
  if (out.size() != grid.size()) throw DomainError("density_on_grid: output size mismatch");
  std::vector<double> lw(grid.size()), l1w(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0 && grid[k] < 1.0)) {
      throw DomainError("density_on_grid: grid angle " + describe(grid[k]) + " outside (0,1)");
    }
    lw[k] = std::log(grid[k]);
    l1w[k] = std::log1p(-grid[k]);
    out[k] = 0.0;
  }
  for (const auto& c : components_) {
    const double a = c.shape.p - 1.0;
    const double bq = c.shape.q - 1.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out[k] += c.weight * std::exp(a * lw[k] + bq * l1w[k] + c.log_norm);
    }
  }
}

// ---------------------------------------------------------------------------
// AngularSurface
// ---------------------------------------------------------------------------

AngularSurface::AngularSurface(AngleSample sample, TuningParams params)
    : sample_(std::move(sample)), params_(params) {
  params_.validate();
}

CrossSection AngularSurface::at(double x) const {
  LocalWeights lw =
      try_local_weights(sample_.covariates(), sample_.angles(), x, params_.b, params_.weights);
  throw_weight_failure(lw, x);
  const FeasibilityReport report = check_shapes(sample_.angles(), lw.theta, params_.nu, params_.tau);
  if (!report.feasible) {
    throw FeasibilityError("infeasible tuning parameters at x=" + describe(x) + ": record " +
                               std::to_string(report.violating_index) +
                               " has nonpositive second beta shape " +
                               describe(report.min_second_shape),
                           report.violating_index);
  }
  return CrossSection(x, std::move(lw.weights), lw.theta, sample_.angles(), params_.nu, params_.tau);
}

FeasibilityReport AngularSurface::feasibility(double x) const {
  const LocalWeights lw =
      try_local_weights(sample_.covariates(), sample_.angles(), x, params_.b, params_.weights);
  if (lw.status != WeightStatus::ok) {
    FeasibilityReport r;
    r.feasible = false;
    r.min_second_shape = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  return check_shapes(sample_.angles(), lw.theta, params_.nu, params_.tau);
}

std::vector<double> standard_angle_grid() {
  std::vector<double> grid(512);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = (2.0 * k + 1.0) / 1024.0;
  return grid;
}

SurfaceGrid surface_grid(const AngularSurface& surface, std::span<const double> x_grid,
                         std::span<const double> w_grid, unsigned threads) {
  if (x_grid.empty() || w_grid.empty()) throw DomainError("surface_grid: grids must be nonempty");
  for (double w : w_grid) {
    if (!(w > 0.0 && w < 1.0)) throw DomainError("surface_grid: angle grid must lie strictly inside (0,1)");
  }
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (!surface.feasibility(x_grid[i]).feasible) bad.push_back(i);
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "surface_grid: infeasible covariate grid points:";
    for (std::size_t i : bad) msg << ' ' << x_grid[i];
    throw FeasibilityError(msg.str(), bad.front());
  }
  SurfaceGrid grid;
  grid.x.assign(x_grid.begin(), x_grid.end());
  grid.w.assign(w_grid.begin(), w_grid.end());
  grid.values.resize(x_grid.size() * w_grid.size());
  const std::size_t m = w_grid.size();
  parallel_for(x_grid.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const CrossSection section = surface.at(x_grid[i]);
      section.density_on_grid(w_grid, std::span<double>(grid.values).subspan(i * m, m));
    }
  });
  grid.negative_entries = static_cast<std::size_t>(
      std::count_if(grid.values.begin(), grid.values.end(), [](double v) { return v < 0.0; }));
  return grid;
}

}  // namespace angsurf
