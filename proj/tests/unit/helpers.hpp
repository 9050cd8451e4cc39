#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "angsurf/angular_estimator.hpp"

namespace testing_util {

/// Random sample with covariates uniform on [lo, hi] and angles uniform on
/// [wlo, whi]; uses std::mt19937_64 directly so it is independent of the
/// library's generators.
inline angsurf::AngleSample random_sample(std::size_t n, std::uint64_t seed, double lo = 0.0,
                                          double hi = 1.0, double wlo = 0.05, double whi = 0.95) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(lo, hi), uw(wlo, whi);
  std::vector<double> x(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ux(gen);
    w[i] = uw(gen);
  }
  return angsurf::AngleSample(std::move(x), std::move(w));
}

inline std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace testing_util
