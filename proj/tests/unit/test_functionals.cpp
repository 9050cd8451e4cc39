#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "angsurf/angular_estimator.hpp"
#include "angsurf/functionals.hpp"
#include "angsurf/models.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace angsurf;
using testing_util::random_sample;
using testing_util::to_vector;

namespace {

/// A_x(w) = 1 - w + 2 int_0^w H_x(u) du with the oracle mixture CDF.
double pickands_oracle(const oracle::Mixture& m, double w) {
  if (w == 0.0) return 1.0;
  return 1.0 - w + 2.0 * oracle::integrate([&](double u) { return m.cdf(u); }, 0.0, w);
}

double bev_oracle(const oracle::Mixture& m, double y1, double y2) {
  const double split = y1 / (y1 + y2);
  const double lower = oracle::integrate([&](double u) { return (1 - u) / y2 * m.density(u); }, 0.0, split);
  const double upper = oracle::integrate([&](double u) { return u / y1 * m.density(u); }, split, 1.0);
  return std::exp(-2.0 * (lower + upper));
}

}  // namespace

TEST_SUITE("functionals") {
  TEST_CASE("Pickands endpoints") {
    const auto s = random_sample(80, 2);
    AngularSurface surf(s, {0.2, 8.0, 1.0});
    for (double x : {0.0, 0.5, 1.0}) {
      CHECK(pickands_hat(0.0, x, surf).value == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(pickands_hat(1.0, x, surf).value == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("Pickands closed form matches quadrature of the mixture CDF") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto s = random_sample(40, seed);
      AngularSurface surf(s, {0.3, 6.0, 6.0});
      const auto xs = to_vector(s.covariates()), ws = to_vector(s.angles());
      for (double x : {0.1, 0.6}) {
        const auto m = oracle::mixture(xs, ws, x, 0.3, 6.0, 6.0);
        for (double w : {0.1, 0.3, 0.5, 0.8}) {
          CHECK(std::abs(pickands_hat(w, x, surf).value - pickands_oracle(m, w)) < 1e-8);
        }
      }
    }
  }

  TEST_CASE("Pickands bounds and convexity on a grid") {
    const auto s = random_sample(200, 17);
    AngularSurface surf(s, {0.1, 25.0, 0.5});
    for (int i = 0; i <= 10; ++i) {
      const double x = i / 10.0;
      const auto section = surf.at(x);
      std::vector<double> a;
      for (int k = 0; k <= 20; ++k) {
        const double w = k / 20.0;
        const auto est = pickands_hat(w, section);
        CHECK(est.value >= std::max(w, 1 - w) - 1e-6);
        CHECK(est.value <= 1.0 + 1e-6);
        CHECK_FALSE(est.flagged);
        a.push_back(est.value);
      }
      for (std::size_t k = 1; k + 1 < a.size(); ++k) CHECK(a[k - 1] - 2 * a[k] + a[k + 1] >= -1e-6);
    }
  }

  TEST_CASE("extremal coefficient two ways") {
    const auto s = random_sample(150, 23);
    AngularSurface surf(s, {0.15, 12.0, 1.0});
    for (double x : {0.0, 0.33, 0.9}) {
      const auto section = surf.at(x);
      const double a = extremal_coeff_hat(section).value;
      const double b = extremal_coeff_by_quadrature(section).value;
      CHECK(std::abs(a - b) < 1e-6);
      CHECK(a >= 1.0);
      CHECK(a <= 2.0);
      CHECK(a == doctest::Approx(2 * pickands_hat(0.5, section).value).epsilon(1e-15));
    }
  }

  TEST_CASE("BEV matches quadrature of its defining integral") {
    const auto s = random_sample(50, 29);
    AngularSurface surf(s, {0.25, 9.0, 0.8});
    const auto xs = to_vector(s.covariates()), ws = to_vector(s.angles());
    const auto m = oracle::mixture(xs, ws, 0.45, 0.25, 9.0, 0.8);
    for (auto [y1, y2] : std::vector<std::pair<double, double>>{{1, 1}, {0.5, 2}, {3, 0.2}, {10, 10}}) {
      const double got = bev_hat(y1, y2, 0.45, surf).value;
      CHECK(std::abs(got - bev_oracle(m, y1, y2)) < 1e-8);
      CHECK(got > 0.0);
      CHECK(got < 1.0);
    }
  }

  TEST_CASE("BEV margin limit") {
    const auto s = random_sample(100, 31);
    AngularSurface surf(s, {0.2, 10.0, 1.0});
    for (double y : {0.3, 1.0, 4.0}) {
      CHECK(std::abs(bev_hat(y, 1e8, 0.5, surf).value - std::exp(-1.0 / y)) < 1e-6);
      CHECK(std::abs(bev_hat(1e8, y, 0.5, surf).value - std::exp(-1.0 / y)) < 1e-6);
    }
  }

  TEST_CASE("BEV near complete dependence") {
    // Every component is Beta(nu/2, nu/2), so V(y, y) = (1 + 2 E|W - 1/2|) / y.
    AngleSample s({0.0, 0.5, 1.0}, {0.5, 0.5, 0.5});
    double previous_gap = 1.0;
    for (double nu : {1e2, 1e3, 1e4}) {
      AngularSurface surf(s, {0.5, nu, 0.0});
      const double half = nu / 2;
      const double mad = 2 * oracle::integrate([&](double w) { return (w - 0.5) * oracle::beta_pdf(w, half, half); }, 0.5, 1.0);
      double gap = 0.0;
      for (double y : {0.5, 1.0, 3.0}) {
        const double g = bev_hat(y, y, 0.5, surf).value;
        CHECK(std::abs(g - std::exp(-(1 + 2 * mad) / y)) < 1e-8);
        gap = std::max(gap, std::abs(g - std::exp(-1.0 / y)));
      }
      CHECK(gap < previous_gap);
      previous_gap = gap;
    }
  }

  TEST_CASE("BEV is nondecreasing in each argument") {
    const auto s = random_sample(100, 37);
    AngularSurface surf(s, {0.2, 10.0, 1.0});
    const auto section = surf.at(0.3);
    for (double y2 : {0.2, 1.0, 5.0}) {
      double prev = 0.0;
      for (double y1 = 0.05; y1 < 20; y1 *= 1.3) {
        const double v = bev_hat(y1, y2, section).value;
        CHECK(v >= prev);
        prev = v;
      }
    }
    for (double y1 : {0.2, 1.0, 5.0}) {
      double prev = 0.0;
      for (double y2 = 0.05; y2 < 20; y2 *= 1.3) {
        const double v = bev_hat(y1, y2, section).value;
        CHECK(v >= prev);
        prev = v;
      }
    }
  }

  TEST_CASE("logistic closed-form targets") {
    const auto lf = logistic_closed_forms(0.5);
    CHECK(lf.extremal_coefficient() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(lf.pickands(0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(lf.bev(1.0, 1.0) == doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-14));
    CHECK(lf.bev(1.0, 1.0) == doctest::Approx(0.2431).epsilon(1e-3));
    CHECK(logistic_closed_forms(1.0).extremal_coefficient() == 2.0);
  }

  TEST_CASE("estimates from a large stationary logistic sample") {
    const auto model = stationary_logistic_model(0.5);
    const auto xs = covariate_grid_sampler(model.domain, 2000, CovariateScheme::equally_spaced, 0);
    const auto sample = sample_angles(model, xs, 4242);
    // Concentration and bandwidth of the order MLCV selects for this design.
    AngularSurface surf(sample, {0.3, 2.0, 0.5});
    for (double x : {0.2, 0.5, 0.8}) {
      CHECK(std::abs(extremal_coeff_hat(x, surf).value - std::sqrt(2.0)) < 0.1);
      CHECK(std::abs(pickands_hat(0.5, x, surf).value - std::sqrt(0.5)) < 0.05);
    }
  }
}
