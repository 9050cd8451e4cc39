#include "angsurf/preprocess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "angsurf/error.hpp"
#include "angsurf/models.hpp"
#include "angsurf/optimize.hpp"
#include "angsurf/random.hpp"
#include "angsurf/special_functions.hpp"

namespace angsurf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double sample_variance(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / n;
}

}  // namespace

bool timestamp_less(const std::string& a, const std::string& b) {
  double x = 0.0, y = 0.0;
  if (parse_number(a, x) && parse_number(b, y)) return x < y;
  return a < b;
}

void Series::validate() const {
  if (timestamps.size() != values.size()) throw DomainError("series: timestamp and value columns differ in length");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError("series: value at " + timestamps[i] + " is not finite");
    }
    if (i > 0 && !timestamp_less(timestamps[i - 1], timestamps[i])) {
      throw DomainError("series: timestamps must be strictly increasing (" + timestamps[i - 1] +
                        " then " + timestamps[i] + ")");
    }
  }
}

ReturnSeries neg_log_returns(const Series& prices) {
  prices.validate();
  if (prices.size() < 2) throw DomainError("neg_log_returns: need at least two prices");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices.values[i] > 0.0)) {
      throw DomainError("neg_log_returns: nonpositive price at " + prices.timestamps[i]);
    }
  }
  ReturnSeries out;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    out.timestamps.push_back(prices.timestamps[i]);
    out.values.push_back(-(std::log(prices.values[i]) - std::log(prices.values[i - 1])));
  }
  return out;
}

AlignedPair drop_zero_pairs(const ReturnSeries& s1, const ReturnSeries& s2) {
  s1.validate();
  s2.validate();
  std::map<std::string, double> second;
  for (std::size_t i = 0; i < s2.size(); ++i) second.emplace(s2.timestamps[i], s2.values[i]);
  AlignedPair out;
  std::size_t common = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    auto it = second.find(s1.timestamps[i]);
    if (it == second.end()) continue;
    ++common;
    if (s1.values[i] == 0.0 || it->second == 0.0) {
      ++out.dropped;
      continue;
    }
    out.timestamps.push_back(s1.timestamps[i]);
    out.first.push_back(s1.values[i]);
    out.second.push_back(it->second);
  }
  if (common == 0) throw DomainError("drop_zero_pairs: the two series share no timestamps");
  if (out.timestamps.empty()) out.warning = "every common row contains a zero return; result is empty";
  return out;
}

// ---------------------------------------------------------------------------
// GARCH(1,1)
// ---------------------------------------------------------------------------

std::string_view to_string(Innovation innovation) noexcept {
  return innovation == Innovation::normal ? "normal" : "t";
}

Innovation parse_innovation(std::string_view text) {
  if (text == "normal") return Innovation::normal;
  if (text == "t" || text == "student-t" || text == "student_t") return Innovation::student_t;
  throw ConfigError("unknown innovation '" + std::string(text) + "' (expected normal or t)");
}

std::vector<double> garch11_variance(std::span<const double> returns, double omega, double alpha,
                                     double beta) {
  std::vector<double> s2(returns.size());
  if (returns.empty()) return s2;
  s2[0] = sample_variance(returns);
  for (std::size_t t = 1; t < returns.size(); ++t) {
    s2[t] = omega + alpha * returns[t - 1] * returns[t - 1] + beta * s2[t - 1];
  }
  return s2;
}

namespace {

struct GarchParams {
  double omega, alpha, beta, df;
};

GarchParams decode(const std::vector<double>& z, Innovation innovation) {
  const double persistence = logistic(z[1]);
  const double share = logistic(z[2]);
  GarchParams p{std::exp(z[0]), persistence * share, persistence * (1.0 - share), 0.0};
  if (innovation == Innovation::student_t) p.df = 2.1 + std::exp(z[3]);
  return p;
}

double garch_loglik(std::span<const double> r, const GarchParams& p, Innovation innovation) {
  const auto s2 = garch11_variance(r, p.omega, p.alpha, p.beta);
  double ll = 0.0;
  if (innovation == Innovation::normal) {
    const double c = std::log(2.0 * std::numbers::pi);
    for (std::size_t t = 0; t < r.size(); ++t) ll -= 0.5 * (c + std::log(s2[t]) + r[t] * r[t] / s2[t]);
  } else {
    const double v = p.df;
    const double c = std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) -
                     0.5 * std::log(std::numbers::pi * (v - 2.0));
    for (std::size_t t = 0; t < r.size(); ++t) {
      const double z2 = r[t] * r[t] / s2[t];
      ll += c - 0.5 * std::log(s2[t]) - 0.5 * (v + 1.0) * std::log1p(z2 / (v - 2.0));
    }
  }
  return ll;
}

}  // namespace

GarchFit garch11_fit(std::span<const double> returns, Innovation innovation, const GarchOptions& options) {
  if (returns.size() < options.min_length) {
    throw DomainError("garch11_fit: need at least " + std::to_string(options.min_length) +
                      " returns, got " + std::to_string(returns.size()));
  }
  for (double r : returns) {
    if (!std::isfinite(r)) throw DomainError("garch11_fit: returns must be finite");
  }
  const double var = sample_variance(returns);
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  // Rounding leaves a tiny positive variance for a constant series.
  if (!(var > 1e-12 * std::max(*lo * *lo, *hi * *hi)) || *lo == *hi) {
    throw DomainError("garch11_fit: degenerate input (constant series)");
  }

  auto objective = [&](const std::vector<double>& z) {
    const GarchParams p = decode(z, innovation);
    if (!(p.omega > 0.0) || !std::isfinite(p.omega)) return kInf;
    const double ll = garch_loglik(returns, p, innovation);
    return std::isfinite(ll) ? -ll : kInf;
  };
  auto encode = [&](double omega, double alpha, double beta, double df) {
    std::vector<double> z = {std::log(omega), std::log((alpha + beta) / (1.0 - alpha - beta)),
                             std::log(alpha / beta)};
    if (innovation == Innovation::student_t) z.push_back(std::log(df - 2.1));
    return z;
  };

  // Starts spanning low and high persistence; the best is then refined by
  // restarting the simplex until two consecutive runs agree.
  NelderMeadResult best;
  best.value = kInf;
  std::size_t evaluations = 0;
  std::ostringstream trace;
  for (const auto& [a, b] : {std::pair{0.05, 0.90}, std::pair{0.10, 0.80}, std::pair{0.15, 0.50}}) {
    NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations / 6;
    nm.f_tolerance = 1e-12;
    nm.x_tolerance = 1e-7;
    const auto res = nelder_mead(objective, encode(var * (1.0 - a - b), a, b, 8.0), nm);
    evaluations += res.evaluations;
    trace << " start(" << a << "," << b << ")->" << res.value;
    if (res.value < best.value) best = res;
  }
  bool converged = false;
  for (int restart = 0; restart < 6 && evaluations < options.max_evaluations; ++restart) {
    NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations / 6;
    nm.f_tolerance = 1e-12;
    nm.x_tolerance = 1e-7;
    nm.initial_step = 0.1;
    const auto res = nelder_mead(objective, best.x, nm);
    evaluations += res.evaluations;
    trace << " restart->" << res.value;
    const bool stable = std::fabs(res.value - best.value) <= 1e-7 * (std::fabs(best.value) + 1.0);
    if (res.value < best.value) best = res;
    if (stable && res.converged) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(best.value)) {
    throw OptimizationError("garch11_fit: likelihood search did not converge; trace:" + trace.str());
  }

  const GarchParams p = decode(best.x, innovation);
  GarchFit fit;
  fit.omega = p.omega;
  fit.alpha = p.alpha;
  fit.beta = p.beta;
  fit.innovation = innovation;
  fit.df = p.df;
  fit.loglik = -best.value;
  fit.sigma2 = garch11_variance(returns, p.omega, p.alpha, p.beta);
  fit.residuals.resize(returns.size());
  for (std::size_t t = 0; t < returns.size(); ++t) fit.residuals[t] = returns[t] / std::sqrt(fit.sigma2[t]);
  fit.evaluations = evaluations;
  return fit;
}

std::vector<double> simulate_garch11(double omega, double alpha, double beta, std::size_t n,
                                     Innovation innovation, double df, std::uint64_t seed) {
  if (!(omega > 0.0) || alpha < 0.0 || beta < 0.0 || !(alpha + beta < 1.0)) {
    throw DomainError("simulate_garch11: need omega > 0, alpha, beta >= 0 and alpha + beta < 1");
  }
  if (innovation == Innovation::student_t && !(df > 2.0)) {
    throw DomainError("simulate_garch11: Student-t innovations need df > 2");
  }
  constexpr std::size_t burn_in = 500;
  Rng rng(seed);
  double s2 = omega / (1.0 - alpha - beta);
  double prev = 0.0;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n + burn_in; ++t) {
    if (t > 0) s2 = omega + alpha * prev * prev + beta * s2;
    double z = standard_normal(rng);
    if (innovation == Innovation::student_t) {
      const double chi2 = 2.0 * std::exp(log_gamma_variate(rng, 0.5 * df));
      z *= std::sqrt((df - 2.0) / chi2);
    }
    prev = std::sqrt(s2) * z;
    if (t >= burn_in) out.push_back(prev);
  }
  return out;
}

ArchTest engle_arch_lm(std::span<const double> series, std::size_t lags) {
  const std::size_t n = series.size();
  if (lags < 1) throw DomainError("engle_arch_lm: need at least one lag");
  if (n <= lags + 1) {
    throw DomainError("engle_arch_lm: series of length " + std::to_string(n) + " is too short for " +
                      std::to_string(lags) + " lags");
  }
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> e2(n);
  for (std::size_t t = 0; t < n; ++t) e2[t] = (series[t] - mean) * (series[t] - mean);

  const std::size_t rows = n - lags;
  Eigen::MatrixXd design(rows, lags + 1);
  Eigen::VectorXd y(rows);
  for (std::size_t t = lags; t < n; ++t) {
    const std::size_t row = t - lags;
    y(row) = e2[t];
    design(row, 0) = 1.0;
    for (std::size_t l = 1; l <= lags; ++l) design(row, l) = e2[t - l];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(lags + 1)) {
    throw NumericError("engle_arch_lm: degenerate regression (rank-deficient lag matrix)");
  }
  const Eigen::VectorXd coef = qr.solve(y);
  const double ybar = y.mean();
  const double sst = (y.array() - ybar).square().sum();
  if (!(sst > 0.0)) throw NumericError("engle_arch_lm: squared series is constant");
  const double ssr = (y - design * coef).squaredNorm();
  ArchTest out;
  out.lags = lags;
  out.observations = rows;
  out.statistic = static_cast<double>(rows) * std::max(0.0, 1.0 - ssr / sst);
  out.p_value = chi_square_sf(out.statistic, static_cast<double>(lags));
  return out;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

std::vector<double> empirical_frechet(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n == 0) throw EmptySampleError("empty-sample: empirical_frechet needs at least one value");
  for (double v : series) {
    if (!std::isfinite(v)) throw DomainError("empirical_frechet: input must be finite");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return series[a] < series[b]; });
  std::vector<double> out(n);
  const double denom = static_cast<double>(n) + 1.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && series[order[j + 1]] == series[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    const double y = -1.0 / std::log(rank / denom);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = y;
    i = j + 1;
  }
  return out;
}

PseudoPolar pseudo_polar(std::span<const double> y1, std::span<const double> y2, std::span<const double> x) {
  if (y1.size() != y2.size() || y1.size() != x.size()) {
    throw DomainError("pseudo_polar: series must be aligned (equal lengths)");
  }
  PseudoPolar out;
  out.records.reserve(y1.size());
  for (std::size_t i = 0; i < y1.size(); ++i) {
    if (!(y1[i] > 0.0) || !(y2[i] > 0.0) || !std::isfinite(y1[i]) || !std::isfinite(y2[i])) {
      throw DomainError("pseudo_polar: inputs must be positive and finite (record " + std::to_string(i) + ")");
    }
    const double r = y1[i] + y2[i];
    const double w = y1[i] / r;
    if (!(w > 0.0 && w < 1.0)) {
      throw DomainError("pseudo_polar: angle of record " + std::to_string(i) + " rounds to a vertex");
    }
    out.records.push_back({x[i], r, w});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quantile spline
// ---------------------------------------------------------------------------

std::vector<double> QuantileSpline::basis(double x) const {
  constexpr int degree = 3;
  const std::size_t count = coef_.empty() ? knots_.size() - degree - 1 : coef_.size();
  std::vector<double> out(count, 0.0);
  x = std::clamp(x, lo_, hi_);
  // Span index s with knots_[s] <= x < knots_[s+1], using the last nonempty span at hi.
  std::size_t s = degree;
  while (s + 1 < count && x >= knots_[s + 1]) ++s;
  double left[degree + 1], right[degree + 1], n[degree + 1];
  n[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = x - knots_[s + 1 - j];
    right[j] = knots_[s + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  for (int j = 0; j <= degree; ++j) out[s - degree + j] = n[j];
  return out;
}

double QuantileSpline::operator()(double x) const {
  const auto b = basis(x);
  double v = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) v += b[j] * coef_[j];
  return v;
}

QuantileSpline quantile_spline_threshold(std::span<const double> x, std::span<const double> r,
                                         const QuantileSplineOptions& options) {
  const std::size_t n = x.size();
  if (!(options.q > 0.0 && options.q < 1.0)) throw DomainError("quantile_spline_threshold: q must lie in (0,1)");
  if (r.size() != n) throw DomainError("quantile_spline_threshold: x and r differ in length");
  if (n < 20) throw DomainError("quantile_spline_threshold: need at least 20 observations");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(r[i])) throw DomainError("quantile_spline_threshold: non-finite input");
  }

  QuantileSpline spline;
  spline.q_ = options.q;
  std::vector<double> sorted_x(x.begin(), x.end());
  std::sort(sorted_x.begin(), sorted_x.end());
  spline.lo_ = sorted_x.front();
  spline.hi_ = sorted_x.back();
  const std::size_t distinct =
      static_cast<std::size_t>(std::unique(sorted_x.begin(), sorted_x.end()) - sorted_x.begin());
  const std::size_t k = options.knots;
  if (!(spline.hi_ > spline.lo_) || distinct < k + 4) {
    throw NumericError("quantile_spline_threshold: " + std::to_string(distinct) +
                       " distinct covariate values cannot support " + std::to_string(k) +
                       " interior knots; use fewer knots");
  }
  std::vector<double> all_x(x.begin(), x.end());
  std::sort(all_x.begin(), all_x.end());
  spline.knots_.assign(4, spline.lo_);
  for (std::size_t j = 1; j <= k; ++j) {
    const double pos = static_cast<double>(j) / static_cast<double>(k + 1) * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    const double knot = lo + 1 < n ? all_x[lo] + frac * (all_x[lo + 1] - all_x[lo]) : all_x[lo];
    if (!(knot > spline.knots_.back()) || !(knot < spline.hi_)) {
      throw NumericError("quantile_spline_threshold: covariate quantile knots coincide; use fewer knots");
    }
    spline.knots_.push_back(knot);
  }
  for (int j = 0; j < 4; ++j) spline.knots_.push_back(spline.hi_);

  const std::size_t p = k + 4;
  Eigen::MatrixXd design(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = spline.basis(x[i]);
    for (std::size_t j = 0; j < p; ++j) design(i, j) = b[j];
  }

  // Work on a scale-normalized response so the smoothing levels are relative.
  std::vector<double> rs(r.begin(), r.end());
  std::nth_element(rs.begin(), rs.begin() + static_cast<std::ptrdiff_t>(options.q * (n - 1)), rs.end());
  const double empirical_q = rs[static_cast<std::size_t>(options.q * (n - 1))];
  double scale = std::fabs(empirical_q);
  if (!(scale > 0.0)) scale = 1.0;
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) y(i) = r[i] / scale;

  auto pinball = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd res = y - design * beta;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < res.size(); ++i) {
      loss += res(i) >= 0.0 ? options.q * res(i) : (options.q - 1.0) * res(i);
    }
    return loss;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p), empirical_q / scale);
  const Eigen::VectorXd ones_term = (2.0 * options.q - 1.0) * design.transpose() * Eigen::VectorXd::Ones(n);
  double loss = pinball(beta);
  for (double eps = 1e-2; eps >= 1e-6 * 0.999; eps *= 0.1) {
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
      const Eigen::VectorXd res = y - design * beta;
      Eigen::VectorXd v(n);
      for (std::size_t i = 0; i < n; ++i) v(i) = 1.0 / (eps + std::fabs(res(i)));
      const Eigen::MatrixXd gram = design.transpose() * v.asDiagonal() * design;
      const Eigen::VectorXd rhs = design.transpose() * v.cwiseProduct(y) + ones_term;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
      if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
        throw NumericError("quantile_spline_threshold: ill-conditioned spline basis; use fewer knots");
      }
      beta = ldlt.solve(rhs);
      const double next = pinball(beta);
      const bool done = std::fabs(loss - next) <= options.tolerance * (std::fabs(loss) + 1e-300);
      loss = next;
      if (done) break;
    }
  }

  spline.coef_.resize(p);
  for (std::size_t j = 0; j < p; ++j) spline.coef_[j] = beta(static_cast<Eigen::Index>(j)) * scale;
  spline.loss_ = loss * scale;
  std::size_t above = 0;
  for (std::size_t i = 0; i < n; ++i) above += r[i] > spline(x[i]) ? 1 : 0;
  spline.exceedance_fraction_ = static_cast<double>(above) / static_cast<double>(n);

  double tv = 0.0, level = 0.0, prev = spline(spline.lo_);
  constexpr int steps = 512;
  for (int s = 0; s <= steps; ++s) {
    const double v = spline(spline.lo_ + (spline.hi_ - spline.lo_) * s / steps);
    tv += std::fabs(v - prev);
    level += std::fabs(v);
    prev = v;
  }
  level /= steps + 1;
  spline.relative_variation_ = level > 0.0 ? tv / level : 0.0;
  return spline;
}

AngleSample exceedance_angles(const PseudoPolar& pp, const std::function<double(double)>& threshold) {
  std::vector<double> xs, ws;
  for (const auto& rec : pp.records) {
    const double u = threshold(rec.x);
    if (!std::isfinite(u)) throw DomainError("exceedance_angles: threshold is not finite at x=" + std::to_string(rec.x));
    if (rec.r > u) {
      xs.push_back(rec.x);
      ws.push_back(rec.w);
    }
  }
  if (xs.empty()) throw EmptySampleError("empty-sample: no radius exceeds the threshold");
  return AngleSample(std::move(xs), std::move(ws));
}

// ---------------------------------------------------------------------------
// Synthetic market data
// ---------------------------------------------------------------------------

namespace {

std::string iso_date(int day_offset) {
  using namespace std::chrono;
  const sys_days start = sys_days{year{2000} / January / 3};
  const year_month_day ymd{start + days{day_offset}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

MarketData simulate_market(const MarketSimulation& config, std::uint64_t seed) {
  if (config.n < 2) throw DomainError("simulate_market: need at least two returns");
  MarketData out;
  std::vector<double> alphas(config.n);
  for (std::size_t t = 0; t < config.n; ++t) {
    alphas[t] = config.alpha(static_cast<double>(t) / static_cast<double>(config.n - 1));
  }
  // Pairs with the logistic copula, mapped to standard normal innovations.
  const auto pairs = sample_logistic_pairs(alphas, derive_seed(seed, 1));
  // Frechet -> uniform -> normal, using the upper tail where the CDF is near one.
  auto to_normal = [](double y) {
    const double u = std::exp(-1.0 / y);
    if (u <= 0.5) return normal_quantile(std::max(u, 1e-300));
    return -normal_quantile(std::max(-std::expm1(-1.0 / y), 1e-300));
  };
  std::vector<double> z1(config.n), z2(config.n);
  for (std::size_t t = 0; t < config.n; ++t) {
    z1[t] = to_normal(pairs[t].first);
    z2[t] = to_normal(pairs[t].second);
  }
  auto volatility = [&](const std::vector<double>& z) {
    std::vector<double> r(z.size());
    double s2 = config.omega / (1.0 - config.garch_alpha - config.garch_beta);
    for (std::size_t t = 0; t < z.size(); ++t) {
      if (t > 0) s2 = config.omega + config.garch_alpha * r[t - 1] * r[t - 1] + config.garch_beta * s2;
      r[t] = std::sqrt(s2) * z[t];
    }
    return r;
  };
  const auto r1 = volatility(z1);
  const auto r2 = volatility(z2);
  auto prices = [&](const std::vector<double>& r) {
    Series s;
    double p = config.start_price;
    s.timestamps.push_back(iso_date(0));
    s.values.push_back(p);
    for (std::size_t t = 0; t < r.size(); ++t) {
      p *= std::exp(-config.return_scale * r[t]);
      s.timestamps.push_back(iso_date(static_cast<int>(t) + 1));
      s.values.push_back(p);
    }
    return s;
  };
  out.prices1 = prices(r1);
  out.prices2 = prices(r2);
  out.alpha = std::move(alphas);
  return out;
}

}  // namespace angsurf
