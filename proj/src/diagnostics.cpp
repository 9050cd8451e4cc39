#include "angsurf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "angsurf/error.hpp"
#include "angsurf/parallel.hpp"

namespace angsurf {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr std::size_t kMinWindow = 50;

// Ranks / (N + 1), average ranks for ties.
std::vector<double> uniform_scores(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = rank / (static_cast<double>(n) + 1.0);
    i = j + 1;
  }
  return out;
}

struct Counts {
  std::size_t below1 = 0, below2 = 0, joint_below = 0, joint_above = 0, n = 0;
};

Counts count_levels(std::span<const double> s1, std::span<const double> s2, double u) {
  const auto u1 = uniform_scores(s1);
  const auto u2 = uniform_scores(s2);
  Counts c;
  c.n = s1.size();
  for (std::size_t i = 0; i < c.n; ++i) {
    const bool b1 = u1[i] <= u;
    const bool b2 = u2[i] <= u;
    c.below1 += b1;
    c.below2 += b2;
    c.joint_below += b1 && b2;
    c.joint_above += !b1 && !b2;
  }
  return c;
}

TailSummary summarize(const Counts& c, double u) {
  const double n = static_cast<double>(c.n);
  TailSummary s;
  s.u = u;
  s.n_window = c.n;
  s.joint_exceedances = c.joint_above;
  const double level = 0.5 * static_cast<double>(c.below1 + c.below2) / n;
  const double survivor = 1.0 - level;
  const double joint_cdf = static_cast<double>(c.joint_below) / n;
  const double joint_surv = static_cast<double>(c.joint_above) / n;
  if (!(level > 0.0 && level < 1.0) || !(joint_cdf > 0.0)) {
    throw NumericError("chi_chibar: level u=" + std::to_string(u) + " leaves no observations on one side");
  }

  const double log_level = std::log(level);
  const double log_c = std::log(joint_cdf);
  s.chi = 2.0 - log_c / log_level;
  const double dc = kZ95 * std::sqrt((1.0 - joint_cdf) / (n * joint_cdf));
  s.chi_lo = 2.0 - (log_c - dc) / log_level;
  s.chi_hi = 2.0 - std::min(log_c + dc, 0.0) / log_level;

  const double log_s = std::log(joint_surv);
  const double log_surv = std::log(survivor);
  s.chibar = 2.0 * log_surv / log_s - 1.0;
  const double ds = kZ95 * std::sqrt((1.0 - joint_surv) / (n * joint_surv));
  s.chibar_lo = std::max(-1.0, 2.0 * log_surv / (log_s - ds) - 1.0);
  const double upper_log = log_s + ds;
  s.chibar_hi = upper_log < 0.0 ? std::min(1.0, 2.0 * log_surv / upper_log - 1.0) : 1.0;
  return s;
}

void check_inputs(std::span<const double> s1, std::span<const double> s2, double u) {
  if (s1.size() != s2.size()) throw DomainError("chi_chibar: series must be aligned (equal lengths)");
  if (s1.empty()) throw EmptySampleError("empty-sample: chi_chibar needs observations");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("chi_chibar: level u must lie in (0,1)");
}

}  // namespace

TailSummary chi_chibar(std::span<const double> s1, std::span<const double> s2, double u) {
  check_inputs(s1, s2, u);
  const Counts c = count_levels(s1, s2, u);
  if (c.joint_above == 0) {
    throw NumericError("undefined estimate: no joint exceedances of level u=" + std::to_string(u) +
                       " among " + std::to_string(c.n) + " pairs");
  }
  return summarize(c, u);
}

std::vector<RollingEntry> rolling_chi(std::span<const double> s1, std::span<const double> s2,
                                      std::size_t window, std::size_t step, double u, unsigned threads) {
  check_inputs(s1, s2, u);
  if (window < kMinWindow) throw ConfigError("rolling_chi: window must be at least 50");
  if (window > s1.size()) {
    throw ConfigError("rolling_chi: window " + std::to_string(window) + " exceeds the series length " +
                      std::to_string(s1.size()));
  }
  if (step < 1) throw ConfigError("rolling_chi: step must be at least 1");
  const std::size_t count = (s1.size() - window) / step + 1;
  std::vector<RollingEntry> out(count);
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t start = k * step;
      const Counts c = count_levels(s1.subspan(start, window), s2.subspan(start, window), u);
      out[k].end = start + window - 1;
      if (c.joint_above == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out[k].summary = {u, nan, nan, nan, nan, nan, nan, c.n, 0, false};
        continue;
      }
      out[k].summary = summarize(c, u);
    }
  });
  return out;
}

}  // namespace angsurf
