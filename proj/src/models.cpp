#include "angsurf/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "angsurf/error.hpp"
#include "angsurf/random.hpp"
#include "angsurf/special_functions.hpp"

namespace angsurf {

namespace {

constexpr std::size_t kSamplerGrid = 4096;
constexpr double kSamplerClip = 1e-12;

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void check_alpha(double alpha, const char* where) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError(std::string(where) + ": alpha must lie in (0,1], got " + fmt(alpha));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Densities and closed forms
// ---------------------------------------------------------------------------

double logistic_density(double w, double alpha) {
  check_alpha(alpha, "logistic_density");
  if (!(w > 0.0 && w < 1.0)) throw DomainError("logistic_density: w must lie in (0,1), got " + fmt(w));
  if (alpha == 1.0) return 0.0;
  const double inv = 1.0 / alpha;
  const double lw = std::log(w);
  const double l1w = std::log1p(-w);
  const double log_h = std::log(0.5) + std::log(inv - 1.0) + (-1.0 - inv) * (lw + l1w) +
                       (alpha - 2.0) * log_add_exp(-inv * lw, -inv * l1w);
  return std::exp(log_h);
}

double dirichlet_density(double w, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("dirichlet_density: shapes must be positive, got a=" + fmt(a) + ", b=" + fmt(b));
  }
  if (!(w > 0.0 && w < 1.0)) throw DomainError("dirichlet_density: w must lie in (0,1), got " + fmt(w));
  const double log_h = std::log(a) + std::log(b) + std::lgamma(a + b + 1.0) +
                       (a - 1.0) * std::log(a * w) + (b - 1.0) * std::log(b * (1.0 - w)) -
                       std::log(2.0) - std::lgamma(a) - std::lgamma(b) -
                       (a + b + 1.0) * std::log(a * w + b * (1.0 - w));
  return std::exp(log_h);
}

LogisticClosedForms::LogisticClosedForms(double alpha) : alpha_(alpha) {
  check_alpha(alpha, "logistic_closed_forms");
}

double LogisticClosedForms::pickands(double w) const {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("pickands: w must lie in [0,1]");
  if (w == 0.0 || w == 1.0) return 1.0;
  const double inv = 1.0 / alpha_;
  return std::exp(alpha_ * log_add_exp(inv * std::log1p(-w), inv * std::log(w)));
}

double LogisticClosedForms::extremal_coefficient() const noexcept { return std::pow(2.0, alpha_); }

double LogisticClosedForms::bev(double y1, double y2) const {
  if (!(y1 > 0.0) || !(y2 > 0.0)) throw DomainError("bev: margins must be positive");
  const double inv = 1.0 / alpha_;
  return std::exp(-std::exp(alpha_ * log_add_exp(-inv * std::log(y1), -inv * std::log(y2))));
}

double LogisticClosedForms::angular_cdf(double w) const {
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  if (alpha_ == 1.0) return 0.5;
  // H(w) = (1 + A'(w)) / 2
  const double inv = 1.0 / alpha_;
  const double s = log_add_exp(inv * std::log1p(-w), inv * std::log(w));
  const double slope = std::exp((alpha_ - 1.0) * s) *
                       (std::pow(w, inv - 1.0) - std::pow(1.0 - w, inv - 1.0));
  return 0.5 * (1.0 + slope);
}

LogisticClosedForms logistic_closed_forms(double alpha) { return LogisticClosedForms(alpha); }

// ---------------------------------------------------------------------------
// Links and models
// ---------------------------------------------------------------------------

LinkFunction LinkFunction::tabulated(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw DomainError("tabulated link needs at least one knot");
  std::sort(knots.begin(), knots.end());
  return {LinkKind::tabulated, 0.0, std::move(knots)};
}

double LinkFunction::operator()(double x) const {
  switch (kind) {
    case LinkKind::probit_identity: return normal_cdf(x);
    case LinkKind::probit_square: return normal_cdf(x * x);
    case LinkKind::identity: return x;
    case LinkKind::exp: return std::exp(x);
    case LinkKind::constant: return constant;
    case LinkKind::tabulated: {
      if (x <= table.front().first) return table.front().second;
      if (x >= table.back().first) return table.back().second;
      auto hi = std::upper_bound(table.begin(), table.end(), x,
                                 [](double v, const auto& knot) { return v < knot.first; });
      auto lo = hi - 1;
      const double t = (x - lo->first) / (hi->first - lo->first);
      return lo->second + t * (hi->second - lo->second);
    }
  }
  return 0.0;
}

ModelParameters ConditionalModel::parameters(double x) const {
  if (!domain.contains(x)) {
    throw DomainError("model '" + name + "': covariate " + fmt(x) + " outside [" + fmt(domain.lo) +
                      ", " + fmt(domain.hi) + "]");
  }
  ModelParameters p{first(x), family == ModelFamily::dirichlet ? second(x) : 0.0};
  if (family == ModelFamily::logistic) {
    check_alpha(p.first, "model parameters");
  } else if (!(p.first > 0.0) || !(p.second > 0.0)) {
    throw DomainError("model '" + name + "': Dirichlet shapes must be positive at x=" + fmt(x));
  }
  return p;
}

double ConditionalModel::density(double w, double x) const {
  const ModelParameters p = parameters(x);
  return family == ModelFamily::logistic ? logistic_density(w, p.first)
                                         : dirichlet_density(w, p.first, p.second);
}

void ConditionalModel::validate() const {
  if (!(domain.hi > domain.lo)) throw DomainError("model '" + name + "': empty covariate domain");
  for (int k = 0; k <= 200; ++k) parameters(domain.lo + domain.width() * k / 200.0);
}

double model_density(double w, double x, const ConditionalModel& model) {
  return model.density(w, x);
}

ConditionalModel logistic_model() {
  return {"logistic", ModelFamily::logistic, LinkFunction::probit_identity(), LinkFunction::fixed(0.0),
          {normal_quantile(0.2), normal_quantile(0.4)}};
}

ConditionalModel logistic_square_model() {
  return {"logistic-sq", ModelFamily::logistic, LinkFunction::probit_square(), LinkFunction::fixed(0.0),
          {-3.0, 3.0}};
}

ConditionalModel symmetric_dirichlet_model() {
  return {"sdir", ModelFamily::dirichlet, LinkFunction::identity(), LinkFunction::identity(), {0.8, 4.0}};
}

ConditionalModel asymmetric_dirichlet_model() {
  return {"adir", ModelFamily::dirichlet, LinkFunction::identity(), LinkFunction::fixed(100.0), {0.5, 2.0}};
}

ConditionalModel stationary_logistic_model(double alpha, Interval domain) {
  check_alpha(alpha, "stationary_logistic_model");
  return {"logistic-stationary", ModelFamily::logistic, LinkFunction::fixed(alpha),
          LinkFunction::fixed(0.0), domain};
}

ConditionalModel model_by_name(std::string_view name) {
  if (name == "logistic") return logistic_model();
  if (name == "logistic-sq") return logistic_square_model();
  if (name == "sdir") return symmetric_dirichlet_model();
  if (name == "adir") return asymmetric_dirichlet_model();
  throw ConfigError("unknown model family '" + std::string(name) +
                    "' (expected logistic, logistic-sq, sdir or adir)");
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

std::vector<double> covariate_grid_sampler(Interval domain, std::size_t n, CovariateScheme scheme,
                                           std::uint64_t seed) {
  if (!(domain.hi > domain.lo)) throw DomainError("covariate_grid_sampler: empty interval");
  if (n == 0) throw DomainError("covariate_grid_sampler: n must be at least 1");
  std::vector<double> xs(n);
  if (scheme == CovariateScheme::equally_spaced) {
    if (n == 1) {
      xs[0] = 0.5 * (domain.lo + domain.hi);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = domain.lo + domain.width() * static_cast<double>(i) / static_cast<double>(n - 1);
      }
      xs.back() = domain.hi;
    }
  } else {
    Rng rng(seed);
    for (auto& x : xs) x = domain.lo + domain.width() * uniform01(rng);
  }
  return xs;
}

namespace {

// Cumulative mass over an equally spaced grid in t = logit(w); the integrand
// h(w) w (1 - w) stays bounded where h has integrable endpoint singularities.
struct InverseCdfTable {
  std::vector<double> t;
  std::vector<double> cumulative;  // unnormalized
};

double logistic_fn(double t) { return 1.0 / (1.0 + std::exp(-t)); }

InverseCdfTable build_table(const ConditionalModel& model, ModelParameters params) {
  if (model.family == ModelFamily::logistic && params.first == 1.0) {
    throw NumericError("sample_angles: logistic alpha = 1 puts all mass on the vertices "
                       "(degenerate angular density)");
  }
  InverseCdfTable table;
  table.t.resize(kSamplerGrid);
  table.cumulative.resize(kSamplerGrid);
  const double t_hi = std::log((1.0 - kSamplerClip) / kSamplerClip);
  const double step = 2.0 * t_hi / static_cast<double>(kSamplerGrid - 1);
  double previous = 0.0;
  for (std::size_t k = 0; k < kSamplerGrid; ++k) {
    const double t = -t_hi + step * static_cast<double>(k);
    const double w = logistic_fn(t);
    const double w_complement = logistic_fn(-t);
    table.t[k] = t;
    const double h = model.family == ModelFamily::logistic
                         ? logistic_density(w, params.first)
                         : dirichlet_density(w, params.first, params.second);
    const double g = h * w * w_complement;
    table.cumulative[k] = k == 0 ? 0.0 : table.cumulative[k - 1] + 0.5 * (previous + g) * step;
    previous = g;
  }
  if (!(table.cumulative.back() >= 1e-12) || !std::isfinite(table.cumulative.back())) {
    throw NumericError("sample_angles: degenerate angular density (interior mass " +
                       fmt(table.cumulative.back()) + ")");
  }
  return table;
}

double invert(const InverseCdfTable& table, double u) {
  const double target = u * table.cumulative.back();
  auto it = std::upper_bound(table.cumulative.begin(), table.cumulative.end(), target);
  double t;
  if (it == table.cumulative.begin()) {
    t = table.t.front();
  } else if (it == table.cumulative.end()) {
    t = table.t.back();
  } else {
    const std::size_t k = static_cast<std::size_t>(it - table.cumulative.begin());
    const double c0 = table.cumulative[k - 1];
    const double c1 = table.cumulative[k];
    const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
    t = table.t[k - 1] + frac * (table.t[k] - table.t[k - 1]);
  }
  return logistic_fn(t);
}

}  // namespace

AngleSample sample_angles(const ConditionalModel& model, std::span<const double> x_values,
                          std::uint64_t seed) {
  if (x_values.empty()) throw EmptySampleError("empty-sample: sample_angles needs covariates");
  Rng rng(seed);
  // Tables are shared between covariates with identical parameters.
  std::map<std::pair<double, double>, InverseCdfTable> cache;
  std::vector<double> xs(x_values.begin(), x_values.end());
  std::vector<double> ws(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const ModelParameters p = model.parameters(xs[i]);
    auto key = std::make_pair(p.first, p.second);
    auto it = cache.find(key);
    if (it == cache.end()) {
      if (cache.size() > 64) cache.clear();
      it = cache.emplace(key, build_table(model, p)).first;
    }
    ws[i] = invert(it->second, uniform01(rng));
  }
  return AngleSample(std::move(xs), std::move(ws));
}

std::vector<std::pair<double, double>> sample_logistic_pairs(std::span<const double> alphas,
                                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(alphas.size());
  for (double alpha : alphas) {
    check_alpha(alpha, "sample_logistic_pairs");
    double stable = 1.0;
    if (alpha < 1.0) {
      // Positive stable variable with Laplace transform exp(-t^alpha).
      const double angle = std::numbers::pi * uniform01(rng);
      const double e = standard_exponential(rng);
      stable = std::sin(alpha * angle) / std::pow(std::sin(angle), 1.0 / alpha) *
               std::pow(std::sin((1.0 - alpha) * angle) / e, (1.0 - alpha) / alpha);
    }
    const double e1 = standard_exponential(rng);
    const double e2 = standard_exponential(rng);
    pairs.emplace_back(std::pow(stable / e1, alpha), std::pow(stable / e2, alpha));
  }
  return pairs;
}

}  // namespace angsurf
