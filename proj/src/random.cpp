#include "angsurf/random.hpp"

#include <cmath>

namespace angsurf {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(Rng& rng) {
  // 53 random bits, never exactly 0.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
  // Marsaglia polar method; keeps the stream independent of the standard
  // library's distribution implementations.
  double u, v, s;
  do {
    u = 2.0 * uniform01(rng) - 1.0;
    v = 2.0 * uniform01(rng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double standard_exponential(Rng& rng) { return -std::log(uniform01(rng)); }

double log_gamma_variate(Rng& rng, double shape) {
  if (shape < 1.0) {
    // G(a) = G(a+1) * U^(1/a)
    return log_gamma_variate(rng, shape + 1.0) + std::log(uniform01(rng)) / shape;
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = standard_normal(rng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * z * z * z * z ||
        std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) {
      return std::log(d * v);
    }
  }
}

double beta_variate(Rng& rng, double p, double q) {
  for (;;) {
    const double lx = log_gamma_variate(rng, p);
    const double ly = log_gamma_variate(rng, q);
    // x/(x+y) = 1/(1+exp(ly-lx))
    const double w = 1.0 / (1.0 + std::exp(ly - lx));
    if (w > 0.0 && w < 1.0) return w;
  }
}

}  // namespace angsurf
