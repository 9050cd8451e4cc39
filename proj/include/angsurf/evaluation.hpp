#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "angsurf/angular_estimator.hpp"
#include "angsurf/models.hpp"
#include "angsurf/tuning.hpp"

namespace angsurf {

struct GridSpec {
  std::size_t x_nodes = 201;
  std::size_t w_nodes = 513;
  double clip = 1.0 / 1024.0;  // w ranges over [clip, 1 - clip]

  std::vector<double> x_grid(Interval domain) const;
  std::vector<double> w_grid() const;
};

/// Density evaluator (w, x) -> value.
using SurfaceFunction = std::function<double(double w, double x)>;

/// Tensor-product trapezoid of |estimate - truth| over domain x [clip, 1 - clip].
double iae(const SurfaceFunction& estimate, const SurfaceFunction& truth, Interval domain,
           const GridSpec& grid = {});

/// Integrated absolute error of a fitted surface against a model. Throws
/// FeasibilityError listing infeasible grid covariates.
double iae(const AngularSurface& surface, const ConditionalModel& truth, const GridSpec& grid = {},
           unsigned threads = 1);

/// Truth mass outside [clip, 1 - clip], averaged over the covariate domain
/// (one minus the trapezoid integral of the model density on the grid).
double excluded_truth_mass(const ConditionalModel& truth, const GridSpec& grid = {});

struct MiaeFailure {
  std::size_t replicate;
  std::string message;
};

struct MiaeReport {
  double value = 0.0;                 // mean of per_replicate
  std::vector<double> per_replicate;  // successful replicates, in order
  std::vector<TuningParams> params;
  std::size_t n_replicates = 0;       // requested
  std::vector<MiaeFailure> failures;
  GridSpec grid;
  double std_error = 0.0;             // sd(per_replicate) / sqrt(count)
  double excluded_mass = 0.0;
};

struct MiaeOptions {
  CovariateScheme covariates = CovariateScheme::equally_spaced;
  unsigned threads = 1;
  GridSpec grid;
};

/// Replicate r: covariates on the model domain, angles drawn with stream
/// derive_seed(seed, r), tuning by select_tuning, then iae against the truth.
MiaeReport miae_study(const ConditionalModel& truth, std::size_t n, std::size_t replicates,
                      const CvConfig& cv_config, WeightScheme weights, std::uint64_t seed,
                      const MiaeOptions& options = {});

}  // namespace angsurf
