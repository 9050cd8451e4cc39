#include "angsurf/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "angsurf/error.hpp"
#include "angsurf/optimize.hpp"
#include "angsurf/parallel.hpp"

namespace angsurf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kComponentCutoff = 1e-17;

struct FoldData {
  std::vector<double> x;
  std::vector<double> w;
};

std::vector<FoldData> training_sets(const AngleSample& sample, const FoldAssignment& folds) {
  if (folds.fold.size() != sample.size()) {
    throw ConfigError("fold assignment does not match the sample size");
  }
  std::vector<FoldData> train(folds.folds);
  for (std::size_t k = 0; k < folds.folds; ++k) {
    for (std::size_t m = 0; m < folds.folds; ++m) {
      if (m == k) continue;
      for (std::size_t i : folds.members[m]) {
        train[k].x.push_back(sample.covariates()[i]);
        train[k].w.push_back(sample.angles()[i]);
      }
    }
  }
  return train;
}

// Leave-block-out mixture at x. Returns false on any weight or feasibility failure.
bool leave_out_weights(const FoldData& train, double x, const TuningParams& params, LocalWeights& lw) {
  if (train.x.empty()) return false;
  lw = try_local_weights(train.x, train.w, x, params.b, params.weights);
  if (lw.status != WeightStatus::ok) return false;
  return check_shapes(train.w, lw.theta, params.nu, params.tau).feasible;
}

double mixture_density(const FoldData& train, const LocalWeights& lw, const TuningParams& params,
                       double w) {
  double largest = 0.0;
  for (double wt : lw.weights) largest = std::max(largest, std::fabs(wt));
  const double total = params.nu + 2.0 * params.tau;
  const double lg_total = std::lgamma(total);
  const double log_w = std::log(w);
  const double log_1w = std::log1p(-w);
  double sum = 0.0;
  for (std::size_t i = 0; i < lw.weights.size(); ++i) {
    const double wt = lw.weights[i];
    if (std::fabs(wt) < kComponentCutoff * largest) continue;
    const double p = params.nu * train.w[i] * lw.theta + params.tau;
    const double q = total - p;
    sum += wt * std::exp((p - 1.0) * log_w + (q - 1.0) * log_1w + lg_total - std::lgamma(p) -
                         std::lgamma(q));
  }
  return sum;
}

std::vector<double> unique_sorted(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Smallest second beta shape over the region; -inf on weight failure. With
// stop_at_violation the scan ends at the first nonpositive shape.
double region_margin(const TuningParams& params, const AngleSample& sample,
                     std::span<const double> xs, bool stop_at_violation = false) {
  double margin = kInf;
  for (double x : xs) {
    const LocalWeights lw =
        try_local_weights(sample.covariates(), sample.angles(), x, params.b, params.weights);
    if (lw.status != WeightStatus::ok) return -kInf;
    margin = std::min(margin, check_shapes(sample.angles(), lw.theta, params.nu, params.tau).min_second_shape);
    if (stop_at_violation && !(margin > 0.0)) break;
  }
  return margin;
}

bool params_usable(const TuningParams& p) {
  return p.b > 0.0 && std::isfinite(p.b) && p.nu > 0.0 && std::isfinite(p.nu) && p.tau >= 0.0 &&
         std::isfinite(p.tau);
}

}  // namespace

std::string_view to_string(CvCriterion c) noexcept { return c == CvCriterion::mlcv ? "mlcv" : "lscv"; }

std::string_view to_string(RegionKind r) noexcept {
  switch (r) {
    case RegionKind::unconstrained: return "none";
    case RegionKind::rn: return "rn";
    case RegionKind::rxn: return "rxn";
    case RegionKind::escalate: return "auto";
  }
  return "rn";
}

CvCriterion parse_criterion(std::string_view text) {
  if (text == "mlcv") return CvCriterion::mlcv;
  if (text == "lscv") return CvCriterion::lscv;
  throw ConfigError("unknown criterion '" + std::string(text) + "' (expected mlcv or lscv)");
}

RegionKind parse_region(std::string_view text) {
  if (text == "none" || text == "unconstrained") return RegionKind::unconstrained;
  if (text == "rn") return RegionKind::rn;
  if (text == "rxn") return RegionKind::rxn;
  if (text == "auto") return RegionKind::escalate;
  throw ConfigError("unknown region '" + std::string(text) + "' (expected none, rn, rxn or auto)");
}

void CvConfig::validate(std::size_t n) const {
  if (folds < 2) throw ConfigError("cross-validation needs K >= 2 folds, got " + std::to_string(folds));
  if (folds > n) {
    throw ConfigError("cross-validation needs K <= n, got K=" + std::to_string(folds) +
                      " for n=" + std::to_string(n));
  }
  if (budget < 1) throw ConfigError("optimizer budget must be at least 1");
  if (multistart < 1) throw ConfigError("multistart must be at least 1");
  if (region.kind == RegionKind::rxn && region.x_grid.empty()) {
    throw ConfigError("region rxn needs a covariate grid");
  }
  if (warm_start && !params_usable(*warm_start)) throw ConfigError("warm start parameters are invalid");
}

FoldAssignment covariate_blocks(const AngleSample& sample, std::size_t folds) {
  const std::size_t n = sample.size();
  if (folds < 2) throw ConfigError("covariate_blocks: K must be at least 2, got " + std::to_string(folds));
  if (folds > n) {
    throw ConfigError("covariate_blocks: K=" + std::to_string(folds) + " exceeds n=" + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto x = sample.covariates();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  FoldAssignment out;
  out.folds = folds;
  out.fold.resize(n);
  out.members.resize(folds);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t size = base + (k < extra ? 1 : 0);
    for (std::size_t m = 0; m < size; ++m, ++pos) {
      out.fold[order[pos]] = k;
      out.members[k].push_back(order[pos]);
    }
  }
  return out;
}

bool feasible(const TuningParams& params, const AngleSample& sample, const Region& region) {
  if (!params_usable(params)) return false;
  switch (region.kind) {
    case RegionKind::unconstrained:
      return true;
    case RegionKind::rn:
    case RegionKind::escalate:
      return region_margin(params, sample, unique_sorted(sample.covariates()), true) > 0.0;
    case RegionKind::rxn:
      return region_margin(params, sample, region.x_grid, true) > 0.0;
  }
  return false;
}

double mlcv_objective(const TuningParams& params, const AngleSample& sample,
                      const FoldAssignment& folds, const ObjectiveOptions& options) {
  if (!params_usable(params)) return kInf;
  if (options.require_rn && !feasible(params, sample, Region{RegionKind::rn, {}})) return kInf;
  const std::vector<FoldData> train = training_sets(sample, folds);
  std::vector<double> terms(sample.size(), kInf);
  std::atomic<bool> failed{false};
  parallel_for(sample.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    LocalWeights lw;
    for (std::size_t j = begin; j < end && !failed.load(std::memory_order_relaxed); ++j) {
      const FoldData& t = train[folds.fold[j]];
      if (leave_out_weights(t, sample.covariates()[j], params, lw)) {
        const double h = mixture_density(t, lw, params, sample.angles()[j]);
        if (h > 0.0 && std::isfinite(h)) {
          terms[j] = -std::log(h);
          continue;
        }
      }
      failed = true;
    }
  });
  if (failed) return kInf;
  double total = 0.0;
  for (const auto& block : folds.members) {
    for (std::size_t j : block) total += terms[j];
  }
  return std::isfinite(total) ? total : kInf;
}

double lscv_objective(const TuningParams& params, const AngleSample& sample,
                      const FoldAssignment& folds, const ObjectiveOptions& options) {
  if (!params_usable(params)) return kInf;
  if (options.require_rn && !feasible(params, sample, Region{RegionKind::rn, {}})) return kInf;
  const std::vector<FoldData> train = training_sets(sample, folds);
  const std::vector<double> grid = standard_angle_grid();
  std::vector<double> terms(sample.size(), kInf);
  std::vector<char> bad_integral(sample.size(), 0);
  std::atomic<bool> failed{false};
  parallel_for(sample.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    LocalWeights lw;
    std::vector<double> values(grid.size());
    for (std::size_t j = begin; j < end && !failed.load(std::memory_order_relaxed); ++j) {
      const FoldData& t = train[folds.fold[j]];
      if (!leave_out_weights(t, sample.covariates()[j], params, lw)) {
        failed = true;
        continue;
      }
      const CrossSection section(sample.covariates()[j], lw.weights, lw.theta, t.w, params.nu, params.tau);
      section.density_on_grid(grid, values);
      double integral = 0.0;
      for (std::size_t k = 1; k < grid.size(); ++k) {
        integral += 0.5 * (values[k - 1] * values[k - 1] + values[k] * values[k]) * (grid[k] - grid[k - 1]);
      }
      if (!std::isfinite(integral)) {
        bad_integral[j] = 1;
        continue;
      }
      terms[j] = integral - 2.0 * section.density(sample.angles()[j]);
    }
  });
  if (failed) return kInf;
  for (std::size_t j = 0; j < sample.size(); ++j) {
    if (bad_integral[j]) {
      throw NumericError("lscv_objective: squared-density integral is not finite for held-out record " +
                         std::to_string(j));
    }
  }
  double total = 0.0;
  for (const auto& block : folds.members) {
    for (std::size_t j : block) total += terms[j];
  }
  return std::isfinite(total) ? total : kInf;
}

std::vector<double> to_search_coordinates(const TuningParams& params) {
  return {std::log(params.b), std::log(params.nu), std::log1p(params.tau)};
}

TuningParams from_search_coordinates(const std::vector<double>& z, WeightScheme weights) {
  TuningParams p;
  p.b = std::exp(z[0]);
  p.nu = std::exp(z[1]);
  p.tau = std::expm1(std::fabs(z[2]));
  p.weights = weights;
  return p;
}

namespace {

struct StageOutcome {
  bool found = false;
  TuningResult result;
  std::vector<TraceEntry> seeds;
};

std::vector<TuningParams> seed_grid(const AngleSample& sample, WeightScheme weights) {
  double range = sample.max_covariate() - sample.min_covariate();
  if (!(range > 0.0)) range = 1.0;
  std::vector<TuningParams> seeds;
  for (double fb : {0.03, 0.08, 0.2, 0.5}) {
    for (double nu : {3.0, 10.0, 30.0, 100.0}) {
      for (double tau : {0.0, 1.0, 4.0}) seeds.push_back({fb * range, nu, tau, weights});
    }
  }
  return seeds;
}

StageOutcome run_stage(const AngleSample& sample, const CvConfig& config, const FoldAssignment& folds,
                       RegionKind stage) {
  ObjectiveOptions opts;
  opts.require_rn = stage != RegionKind::unconstrained;
  opts.threads = config.threads;
  StageOutcome out;
  auto& trace = out.result.trace;
  std::size_t evaluations = 0;
  auto objective = [&](const TuningParams& p) {
    ++evaluations;
    double v = kInf;
    if (stage != RegionKind::rxn || feasible(p, sample, Region{RegionKind::rxn, config.region.x_grid})) {
      v = config.criterion == CvCriterion::mlcv ? mlcv_objective(p, sample, folds, opts)
                                                : lscv_objective(p, sample, folds, opts);
    }
    trace.push_back({p, v, stage});
    return v;
  };

  std::vector<TuningParams> seeds = config.warm_start ? std::vector<TuningParams>{*config.warm_start}
                                                      : seed_grid(sample, config.weights);
  for (auto& s : seeds) s.weights = config.weights;
  std::vector<std::pair<double, std::size_t>> ranked;
  auto score_seeds = [&](std::size_t from) {
    for (std::size_t s = from; s < seeds.size(); ++s) {
      const double v = objective(seeds[s]);
      out.seeds.push_back({seeds[s], v, stage});
      if (std::isfinite(v)) ranked.emplace_back(v, s);
    }
  };
  score_seeds(0);
  if (ranked.empty() && config.warm_start) {
    // The warm start can be infeasible for a new sample; fall back to the seed grid.
    auto grid = seed_grid(sample, config.weights);
    for (auto& g : grid) g.weights = config.weights;
    seeds.insert(seeds.end(), grid.begin(), grid.end());
    score_seeds(1);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (ranked.empty() && !config.warm_start) return out;

  std::vector<TuningParams> starts;
  for (std::size_t r = 0; r < ranked.size() && starts.size() < config.multistart; ++r) {
    starts.push_back(seeds[ranked[r].second]);
  }
  if (starts.empty()) starts.push_back(seeds.front());  // infeasible warm start: search from it anyway

  TuningParams best_params = ranked.empty() ? seeds.front() : seeds[ranked.front().second];
  double best_value = ranked.empty() ? kInf : ranked.front().first;
  const std::size_t per_start = std::max<std::size_t>(1, config.budget / starts.size());
  for (const TuningParams& start : starts) {
    NelderMeadOptions nm;
    nm.max_evaluations = per_start;
    nm.f_tolerance = 1e-8;
    nm.x_tolerance = 1e-4;
    nm.initial_step = 0.5;
    const auto result = nelder_mead(
        [&](const std::vector<double>& z) { return objective(from_search_coordinates(z, config.weights)); },
        to_search_coordinates(start), nm);
    if (result.value < best_value) {
      best_value = result.value;
      best_params = from_search_coordinates(result.x, config.weights);
    }
  }
  out.found = std::isfinite(best_value);
  out.result.params = best_params;
  out.result.objective = best_value;
  out.result.evaluations = evaluations;
  out.result.region_used = stage;
  return out;
}

[[noreturn]] void fail_no_feasible(const AngleSample& sample, const CvConfig& config,
                                   const std::vector<TraceEntry>& seeds) {
  const Region check = config.region.kind == RegionKind::rxn
                           ? config.region
                           : Region{RegionKind::rn, {}};
  const std::vector<double> xs = check.kind == RegionKind::rxn ? check.x_grid : unique_sorted(sample.covariates());
  std::vector<std::pair<double, TuningParams>> candidates;
  for (const auto& s : seeds) candidates.emplace_back(region_margin(s.params, sample, xs), s.params);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::ostringstream msg;
  msg << "no feasible tuning parameters found within the budget; best infeasible candidates:";
  for (std::size_t c = 0; c < std::min<std::size_t>(3, candidates.size()); ++c) {
    const auto& [margin, p] = candidates[c];
    msg << " (b=" << p.b << ", nu=" << p.nu << ", tau=" << p.tau << ", min shape " << margin << ")";
  }
  throw OptimizationError(msg.str());
}

}  // namespace

TuningResult select_tuning(const AngleSample& sample, const CvConfig& config) {
  config.validate(sample.size());
  const FoldAssignment folds = covariate_blocks(sample, config.folds);

  std::vector<RegionKind> stages;
  if (config.region.kind == RegionKind::escalate) {
    stages = {RegionKind::unconstrained, RegionKind::rn};
    if (!config.region.x_grid.empty()) stages.push_back(RegionKind::rxn);
  } else {
    stages = {config.region.kind};
  }
  // Under escalation every stage's answer is checked against the strictest
  // region available.
  const Region target = config.region.x_grid.empty() ? Region{RegionKind::rn, {}}
                                                     : Region{RegionKind::rxn, config.region.x_grid};

  std::vector<TraceEntry> all_trace;
  std::vector<TraceEntry> last_seeds;
  std::size_t evaluations = 0;
  for (RegionKind stage : stages) {
    StageOutcome outcome = run_stage(sample, config, folds, stage);
    evaluations += outcome.result.evaluations;
    all_trace.insert(all_trace.end(), outcome.result.trace.begin(), outcome.result.trace.end());
    last_seeds = outcome.seeds;
    if (!outcome.found) continue;
    if (config.region.kind == RegionKind::escalate && stage != stages.back() &&
        !feasible(outcome.result.params, sample, target)) {
      continue;
    }
    TuningResult result = std::move(outcome.result);
    result.evaluations = evaluations;
    result.trace = std::move(all_trace);
    result.seeds = std::move(outcome.seeds);
    return result;
  }
  fail_no_feasible(sample, config, last_seeds);
}

}  // namespace angsurf
