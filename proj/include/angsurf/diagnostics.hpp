#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace angsurf {

/// Empirical chi(u) and chibar(u) with 95% delta-method intervals built on the
/// log-probability scale. Estimates use the realized marginal level of the
/// rank-transformed series, so exactly dependent series give chi = chibar = 1.
struct TailSummary {
  double u = 0.95;
  double chi = 0.0;
  double chibar = 0.0;
  double chi_lo = 0.0;
  double chi_hi = 0.0;
  double chibar_lo = 0.0;
  double chibar_hi = 0.0;
  std::size_t n_window = 0;
  std::size_t joint_exceedances = 0;
  bool valid = true;  // false for rolling windows without joint exceedances
};

/// Rank-based chi/chibar at level u for two aligned series (any margins).
/// Throws NumericError when no pair jointly exceeds the level.
TailSummary chi_chibar(std::span<const double> s1, std::span<const double> s2, double u = 0.95);

struct RollingEntry {
  std::size_t end;  // index of the window's last observation
  TailSummary summary;
};

/// chi_chibar on each window [start, start + window), start advancing by
/// `step`; ranks are recomputed within each window. Windows without joint
/// exceedances yield NaN estimates with valid = false.
std::vector<RollingEntry> rolling_chi(std::span<const double> s1, std::span<const double> s2,
                                      std::size_t window = 600, std::size_t step = 1, double u = 0.95,
                                      unsigned threads = 1);

}  // namespace angsurf
