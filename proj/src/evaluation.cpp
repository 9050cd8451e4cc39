#include "angsurf/evaluation.hpp"

#include <cmath>
#include <optional>

#include "angsurf/error.hpp"
#include "angsurf/parallel.hpp"
#include "angsurf/random.hpp"

namespace angsurf {

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
  std::vector<double> wt(nodes.size(), 0.0);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const double half = 0.5 * (nodes[k] - nodes[k - 1]);
    wt[k - 1] += half;
    wt[k] += half;
  }
  return wt;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k) {
    v[k] = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  if (count > 1) v.back() = hi;
  return v;
}

void check_grid(const GridSpec& g) {
  if (g.x_nodes < 2 || g.w_nodes < 2) throw DomainError("grid needs at least two nodes per axis");
  if (!(g.clip > 0.0 && g.clip < 0.5)) throw DomainError("grid clip must lie in (0, 1/2)");
}

}  // namespace

std::vector<double> GridSpec::x_grid(Interval domain) const {
  check_grid(*this);
  return linspace(domain.lo, domain.hi, x_nodes);
}

std::vector<double> GridSpec::w_grid() const {
  check_grid(*this);
  return linspace(clip, 1.0 - clip, w_nodes);
}

double iae(const SurfaceFunction& estimate, const SurfaceFunction& truth, Interval domain,
           const GridSpec& grid) {
  const auto xs = grid.x_grid(domain);
  const auto ws = grid.w_grid();
  const auto wx = trapezoid_weights(xs);
  const auto ww = trapezoid_weights(ws);
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < ws.size(); ++k) {
      row += ww[k] * std::fabs(estimate(ws[k], xs[i]) - truth(ws[k], xs[i]));
    }
    total += wx[i] * row;
  }
  return total;
}

double iae(const AngularSurface& surface, const ConditionalModel& truth, const GridSpec& grid,
           unsigned threads) {
  const auto xs = grid.x_grid(truth.domain);
  const auto ws = grid.w_grid();
  const SurfaceGrid est = surface_grid(surface, xs, ws, threads);
  const auto wx = trapezoid_weights(xs);
  const auto ww = trapezoid_weights(ws);
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < ws.size(); ++k) {
      row += ww[k] * std::fabs(est.at(i, k) - truth.density(ws[k], xs[i]));
    }
    total += wx[i] * row;
  }
  return total;
}

double excluded_truth_mass(const ConditionalModel& truth, const GridSpec& grid) {
  const auto xs = grid.x_grid(truth.domain);
  const auto ws = grid.w_grid();
  const auto wx = trapezoid_weights(xs);
  const auto ww = trapezoid_weights(ws);
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double mass = 0.0;
    for (std::size_t k = 0; k < ws.size(); ++k) mass += ww[k] * truth.density(ws[k], xs[i]);
    total += wx[i] * (1.0 - mass);
  }
  return total / truth.domain.width();
}

MiaeReport miae_study(const ConditionalModel& truth, std::size_t n, std::size_t replicates,
                      const CvConfig& cv_config, WeightScheme weights, std::uint64_t seed,
                      const MiaeOptions& options) {
  if (replicates < 1) throw ConfigError("miae_study needs at least one replicate");
  if (n < 2) throw ConfigError("miae_study needs n >= 2");
  truth.validate();
  CvConfig cfg = cv_config;
  cfg.weights = weights;
  cfg.threads = 1;
  cfg.validate(n);

  struct Slot {
    std::optional<double> value;
    TuningParams params;
    std::string error;
  };
  std::vector<Slot> slots(replicates);
  parallel_for(replicates, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const std::uint64_t stream = derive_seed(seed, r);
      try {
        const auto xs = covariate_grid_sampler(truth.domain, n, options.covariates, derive_seed(stream, 1));
        AngleSample sample = sample_angles(truth, xs, derive_seed(stream, 2));
        const TuningResult tuned = select_tuning(sample, cfg);
        const AngularSurface surface(std::move(sample), tuned.params);
        slots[r].value = iae(surface, truth, options.grid);
        slots[r].params = tuned.params;
      } catch (const Error& e) {
        slots[r].error = e.what();
      }
    }
  });

  MiaeReport report;
  report.n_replicates = replicates;
  report.grid = options.grid;
  for (std::size_t r = 0; r < replicates; ++r) {
    if (slots[r].value) {
      report.per_replicate.push_back(*slots[r].value);
      report.params.push_back(slots[r].params);
    } else {
      report.failures.push_back({r, slots[r].error});
    }
  }
  const double m = static_cast<double>(report.per_replicate.size());
  if (m > 0) {
    double sum = 0.0;
    for (double v : report.per_replicate) sum += v;
    report.value = sum / m;
    if (m > 1) {
      double ss = 0.0;
      for (double v : report.per_replicate) ss += (v - report.value) * (v - report.value);
      report.std_error = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
    }
  }
  report.excluded_mass = excluded_truth_mass(truth, options.grid);
  return report;
}

}  // namespace angsurf
