#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "angsurf/angular_estimator.hpp"

namespace angsurf {

enum class CvCriterion { mlcv, lscv };
enum class RegionKind { unconstrained, rn, rxn, escalate };

std::string_view to_string(CvCriterion c) noexcept;
std::string_view to_string(RegionKind r) noexcept;
/// "mlcv" / "lscv".
CvCriterion parse_criterion(std::string_view text);
/// "none" / "rn" / "rxn" / "auto".
RegionKind parse_region(std::string_view text);

/// Feasibility region. `rxn` checks a supplied covariate grid standing in for
/// the covariate domain; `escalate` tries unconstrained, then rn, then rxn.
struct Region {
  RegionKind kind = RegionKind::rn;
  std::vector<double> x_grid;
};

struct CvConfig {
  std::size_t folds = 10;
  CvCriterion criterion = CvCriterion::mlcv;
  Region region;
  std::size_t budget = 300;     // Nelder-Mead evaluations shared by all starts
  std::size_t multistart = 3;   // starts taken from the best seed points
  WeightScheme weights = WeightScheme::nadaraya_watson;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// When set, the seed grid is skipped and one start is made from here.
  std::optional<TuningParams> warm_start;

  /// Throws ConfigError.
  void validate(std::size_t n) const;
};

/// fold[i] is the block of record i; records are blocked by sorted covariate.
struct FoldAssignment {
  std::size_t folds = 0;
  std::vector<std::size_t> fold;
  std::vector<std::vector<std::size_t>> members;  // record indices, covariate order
};

/// K contiguous blocks of the covariate-sorted sample, sizes differing by at
/// most one (the first n mod K blocks get the extra record). Ties are broken
/// by record index. Throws ConfigError unless 2 <= K <= n.
FoldAssignment covariate_blocks(const AngleSample& sample, std::size_t folds);

struct ObjectiveOptions {
  /// Also require full-sample feasibility at every sample covariate (R_n).
  bool require_rn = true;
  unsigned threads = 1;
};

/// sum over folds and held-out records of -log h_{X(-k)}(W), where h_{(-k)}
/// is built from the records outside block k. +infinity when any leave-out
/// estimate is infeasible or its density at the held-out angle is not
/// positive, and (by default) when the full-sample R_n check fails.
double mlcv_objective(const TuningParams& params, const AngleSample& sample,
                      const FoldAssignment& folds, const ObjectiveOptions& options = {});

/// sum over held-out records of [int h_{X(-k)}^2 - 2 h_{X(-k)}(W)], the
/// integral by the trapezoid rule on the standard angle grid. Same sentinel
/// rules as mlcv_objective. Throws NumericError if the integral is not finite.
double lscv_objective(const TuningParams& params, const AngleSample& sample,
                      const FoldAssignment& folds, const ObjectiveOptions& options = {});

/// nu (1 - W_i theta_b(x)) + tau > 0 for all i at every x in the region:
/// the sample covariates (rn), the supplied grid (rxn), or nowhere
/// (unconstrained). Weight failures count as infeasible. `escalate` is
/// treated as rn.
bool feasible(const TuningParams& params, const AngleSample& sample, const Region& region);

struct TraceEntry {
  TuningParams params;
  double objective;
  RegionKind region;
};

struct TuningResult {
  TuningParams params;
  double objective = 0.0;
  std::size_t evaluations = 0;
  RegionKind region_used = RegionKind::rn;
  std::vector<TraceEntry> trace;
  std::vector<TraceEntry> seeds;  // seed-grid evaluations of the accepted stage
};

/// Coordinates used by the optimizer: (log b, log nu, log(1 + tau)). The map
/// back is reflected in the last coordinate, tau = expm1(|z3|).
std::vector<double> to_search_coordinates(const TuningParams& params);
TuningParams from_search_coordinates(const std::vector<double>& z, WeightScheme weights);

/// Minimizes the CV criterion over (b, nu, tau): objective at a 4 x 4 x 3 seed
/// grid, then Nelder-Mead from the best `multistart` seeds. Throws
/// OptimizationError when no feasible point is found.
TuningResult select_tuning(const AngleSample& sample, const CvConfig& config);

}  // namespace angsurf
