#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "angsurf/angular_estimator.hpp"
#include "angsurf/random.hpp"
#include "angsurf/tuning.hpp"

namespace angsurf {

/// Draws one angle from a cross section: component i with probability pi_i,
/// then a beta variate with its shapes. Cross sections with negative weights
/// fall back to inverse-CDF sampling of max(h, 0) on a 2048-cell grid.
double draw_angle(const CrossSection& section, Rng& rng);

/// Smoothed bootstrap resample of size n: X = X_j + b N(0,1) for a uniform
/// record j, then W ~ h_X. Draws of X where the estimate is infeasible are
/// redrawn (up to 100 attempts per record, then FeasibilityError).
AngleSample smoothed_resample(const AngleSample& sample, const TuningParams& fitted,
                              std::uint64_t seed);

struct BootstrapOptions {
  /// Re-tuning budget as a fraction of the configured budget.
  bool reduced_budget = true;
  unsigned threads = 1;
};

struct ReplicateFailure {
  std::size_t replicate;
  std::string message;
};

/// Successful replicates only; failures are reported separately.
struct BootstrapEnsemble {
  std::vector<AngularSurface> surfaces;
  std::vector<AngleSample> resamples;
  std::vector<TuningParams> params;
  std::vector<std::size_t> replicate_ids;
  std::vector<ReplicateFailure> failures;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return surfaces.size(); }
};

/// B smoothed-bootstrap replicates; replicate r uses stream derive_seed(seed, r)
/// and is re-tuned by select_tuning warm-started at `fitted`.
BootstrapEnsemble bootstrap_surfaces(const AngleSample& sample, const TuningParams& fitted,
                                     std::size_t replicates, const CvConfig& cv_config,
                                     std::uint64_t seed, const BootstrapOptions& options = {});

/// Modified band depth with bands formed by pairs of curves: for each curve,
/// the average over grid points of the fraction of pairs whose band contains it.
std::vector<double> modified_band_depth(const std::vector<std::vector<double>>& curves);

struct CentralRegion {
  double level = 0.5;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> median;
  std::size_t members = 0;  // curves spanning the envelope
};

/// Envelope of the max(1, floor(level * B)) deepest curves; the median curve is
/// the deepest one (ties broken by position). Needs at least two curves.
CentralRegion central_region(const std::vector<std::vector<double>>& curves, double level);

/// Extremal coefficient C_x over a covariate grid.
std::vector<double> extremal_coefficient_curve(const AngularSurface& surface,
                                               std::span<const double> x_grid);

}  // namespace angsurf
