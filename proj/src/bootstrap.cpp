#include "angsurf/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "angsurf/error.hpp"
#include "angsurf/functionals.hpp"
#include "angsurf/parallel.hpp"

namespace angsurf {

namespace {

constexpr int kMaxRedraws = 100;
constexpr std::size_t kFallbackCells = 2048;

double draw_from_grid(const CrossSection& section, Rng& rng) {
  std::vector<double> grid(kFallbackCells);
  for (std::size_t k = 0; k < kFallbackCells; ++k) grid[k] = (k + 0.5) / kFallbackCells;
  std::vector<double> dens(kFallbackCells);
  section.density_on_grid(grid, dens);
  std::vector<double> cum(kFallbackCells + 1, 0.0);
  for (std::size_t k = 0; k < kFallbackCells; ++k) cum[k + 1] = cum[k] + std::max(dens[k], 0.0);
  if (!(cum.back() > 0.0)) throw NumericError("draw_angle: estimated density has no positive mass");
  const double target = uniform01(rng) * cum.back();
  auto it = std::upper_bound(cum.begin() + 1, cum.end(), target);
  if (it == cum.end()) --it;
  const std::size_t cell = static_cast<std::size_t>(it - cum.begin()) - 1;
  const double mass = cum[cell + 1] - cum[cell];
  const double frac = mass > 0.0 ? (target - cum[cell]) / mass : 0.5;
  const double w = (cell + frac) / kFallbackCells;
  return std::clamp(w, 1e-12, 1.0 - 1e-12);
}

}  // namespace

double draw_angle(const CrossSection& section, Rng& rng) {
  if (section.has_negative_weights()) return draw_from_grid(section, rng);
  const auto comps = section.components();
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  const MixtureComponent* chosen = &comps.back();
  for (const auto& c : comps) {
    acc += c.weight;
    if (target < acc) {
      chosen = &c;
      break;
    }
  }
  return beta_variate(rng, chosen->shape.p, chosen->shape.q);
}

AngleSample smoothed_resample(const AngleSample& sample, const TuningParams& fitted,
                              std::uint64_t seed) {
  fitted.validate();
  const AngularSurface surface(sample, fitted);
  Rng rng(seed);
  const std::size_t n = sample.size();
  std::vector<double> xs(n), ws(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::optional<CrossSection> section;
    double x = 0.0;
    for (int attempt = 0; attempt < kMaxRedraws && !section; ++attempt) {
      const std::size_t j = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * n));
      x = sample.covariates()[j] + fitted.b * standard_normal(rng);
      try {
        section.emplace(surface.at(x));
      } catch (const NumericError&) {
      } catch (const FeasibilityError&) {
      }
    }
    if (!section) {
      throw FeasibilityError("smoothed_resample: no feasible covariate draw after 100 attempts "
                             "for resampled record " + std::to_string(r), r);
    }
    xs[r] = x;
    ws[r] = draw_angle(*section, rng);
  }
  return AngleSample(std::move(xs), std::move(ws));
}

BootstrapEnsemble bootstrap_surfaces(const AngleSample& sample, const TuningParams& fitted,
                                     std::size_t replicates, const CvConfig& cv_config,
                                     std::uint64_t seed, const BootstrapOptions& options) {
  if (replicates < 1) throw ConfigError("bootstrap needs B >= 1");
  CvConfig cfg = cv_config;
  cfg.warm_start = fitted;
  cfg.threads = 1;
  cfg.multistart = 1;
  if (options.reduced_budget) cfg.budget = std::max<std::size_t>(1, cv_config.budget / 4);

  struct Slot {
    std::optional<AngleSample> resample;
    std::optional<TuningParams> params;
    std::string error;
  };
  std::vector<Slot> slots(replicates);
  parallel_for(replicates, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      try {
        AngleSample resample = smoothed_resample(sample, fitted, derive_seed(seed, r));
        cfg.validate(resample.size());
        TuningResult tuned = select_tuning(resample, cfg);
        slots[r].params = tuned.params;
        slots[r].resample.emplace(std::move(resample));
      } catch (const Error& e) {
        slots[r].error = e.what();
      }
    }
  });

  BootstrapEnsemble ensemble;
  ensemble.seed = seed;
  for (std::size_t r = 0; r < replicates; ++r) {
    if (!slots[r].params) {
      ensemble.failures.push_back({r, slots[r].error});
      continue;
    }
    ensemble.surfaces.emplace_back(*slots[r].resample, *slots[r].params);
    ensemble.resamples.push_back(std::move(*slots[r].resample));
    ensemble.params.push_back(*slots[r].params);
    ensemble.replicate_ids.push_back(r);
  }
  return ensemble;
}

std::vector<double> modified_band_depth(const std::vector<std::vector<double>>& curves) {
  const std::size_t count = curves.size();
  if (count < 2) throw DomainError("band depth needs at least two curves");
  const std::size_t len = curves.front().size();
  if (len == 0) throw DomainError("band depth needs a nonempty grid");
  for (const auto& c : curves) {
    if (c.size() != len) throw DomainError("band depth: curves must share a common grid");
  }
  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
  const double pairs = choose2(static_cast<double>(count));
  std::vector<double> depth(count, 0.0);
  std::vector<double> column(count);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t i = 0; i < count; ++i) column[i] = curves[i][t];
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < count; ++i) {
      const auto below = static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), column[i]) - sorted.begin());
      const auto above = static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), column[i]));
      depth[i] += (pairs - choose2(below) - choose2(above)) / pairs;
    }
  }
  for (double& d : depth) d /= static_cast<double>(len);
  return depth;
}

CentralRegion central_region(const std::vector<std::vector<double>>& curves, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("central region level must lie in (0,1)");
  const std::vector<double> depth = modified_band_depth(curves);
  std::vector<std::size_t> order(curves.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return depth[a] > depth[b]; });
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(level * static_cast<double>(curves.size()) + 1e-9)));

  CentralRegion region;
  region.level = level;
  region.members = keep;
  region.median = curves[order.front()];
  region.lower = region.median;
  region.upper = region.median;
  for (std::size_t m = 1; m < keep; ++m) {
    const auto& c = curves[order[m]];
    for (std::size_t t = 0; t < c.size(); ++t) {
      region.lower[t] = std::min(region.lower[t], c[t]);
      region.upper[t] = std::max(region.upper[t], c[t]);
    }
  }
  return region;
}

std::vector<double> extremal_coefficient_curve(const AngularSurface& surface,
                                               std::span<const double> x_grid) {
  std::vector<double> out;
  out.reserve(x_grid.size());
  for (double x : x_grid) out.push_back(extremal_coeff_hat(x, surface).value);
  return out;
}

}  // namespace angsurf
