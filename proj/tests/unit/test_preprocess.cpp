#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "angsurf/error.hpp"
#include "angsurf/preprocess.hpp"
#include "pipeline.hpp"

using namespace angsurf;

namespace {

Series make_series(const std::vector<double>& values) {
  Series s;
  for (std::size_t i = 0; i < values.size(); ++i) s.timestamps.push_back(std::to_string(i + 1));
  s.values = values;
  return s;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (double& x : v) x = z(gen);
  return v;
}

double median3(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("negative log returns") {
    for (double r : neg_log_returns(make_series({5, 5, 5})).values) CHECK(r == 0.0);
    CHECK(neg_log_returns(make_series({100, 110})).values[0] == doctest::Approx(-0.09531).epsilon(1e-4));
    CHECK(neg_log_returns(make_series({100, 90})).values[0] == doctest::Approx(0.10536).epsilon(1e-4));
    const auto r = neg_log_returns(make_series({100, 90, 95}));
    CHECK(r.size() == 2);
    CHECK(r.timestamps[0] == "2");
    CHECK_THROWS_AS(neg_log_returns(make_series({100, 0})), DomainError);
    CHECK_THROWS_AS(neg_log_returns(make_series({100})), DomainError);
  }

  TEST_CASE("series ordering") {
    CHECK(timestamp_less("9", "10"));
    CHECK(timestamp_less("2001-01-02", "2001-01-10"));
    Series bad{{"2", "1"}, {1.0, 2.0}};
    CHECK_THROWS_AS(bad.validate(), DomainError);
  }

  TEST_CASE("zero-pair removal") {
    const auto a = make_series({0.1, 0.2, 0.3});
    const auto b = make_series({0.5, 0.6, 0.7});
    const auto same = drop_zero_pairs(a, b);
    CHECK(same.first == a.values);
    CHECK(same.second == b.values);
    CHECK(same.dropped == 0);
    const auto z = drop_zero_pairs(make_series({0.1, 0.0, 0.3}), b);
    CHECK(z.timestamps == std::vector<std::string>{"1", "3"});
    CHECK(z.second == std::vector<double>{0.5, 0.7});
    const auto all = drop_zero_pairs(make_series({0.0, 0.0, 0.0}), b);
    CHECK(all.first.empty());
    CHECK_FALSE(all.warning.empty());
    Series other{{"a", "b"}, {1.0, 2.0}};
    CHECK_THROWS_AS(drop_zero_pairs(a, other), DomainError);
  }

  TEST_CASE("GARCH recovery") {
    std::vector<double> om, al, be;
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto r = simulate_garch11(0.05, 0.10, 0.85, 5000, Innovation::normal, 0.0, seed);
      const auto fit = garch11_fit(r, Innovation::normal);
      om.push_back(fit.omega);
      al.push_back(fit.alpha);
      be.push_back(fit.beta);
      CHECK(fit.alpha + fit.beta < 1.0);
      CHECK(fit.residuals.size() == r.size());
      CHECK(engle_arch_lm(fit.residuals, 5).p_value > 0.01);
    }
    CHECK(std::abs(median3(om[0], om[1], om[2]) - 0.05) < 0.03);
    CHECK(std::abs(median3(al[0], al[1], al[2]) - 0.10) < 0.04);
    CHECK(std::abs(median3(be[0], be[1], be[2]) - 0.85) < 0.05);
  }

  TEST_CASE("GARCH with Student-t innovations") {
    const auto r = simulate_garch11(0.05, 0.10, 0.85, 4000, Innovation::student_t, 6.0, 4);
    const auto fit = garch11_fit(r, Innovation::student_t);
    CHECK(fit.df > 2.1);
    CHECK(fit.df < 30.0);
    CHECK(std::abs(fit.alpha - 0.10) < 0.05);
    CHECK(std::abs(fit.beta - 0.85) < 0.07);
  }

  TEST_CASE("GARCH on i.i.d. data and degenerate input") {
    const auto z = normals(3000, 7);
    const auto fit = garch11_fit(z, Innovation::normal);
    CHECK(fit.alpha < 0.05);
    std::size_t rejections = 0;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
      const auto iid = normals(2000, seed);
      rejections += engle_arch_lm(garch11_fit(iid, Innovation::normal).residuals, 1).p_value <= 0.05 ? 1 : 0;
    }
    // Binomial(20, 0.05) exceeds 4 with probability below 0.003.
    CHECK(rejections <= 4);
    CHECK_THROWS_AS(garch11_fit(std::vector<double>(500, 0.3), Innovation::normal), DomainError);
    CHECK_THROWS_AS(garch11_fit(std::vector<double>(50, 0.3), Innovation::normal), DomainError);
    const auto v = garch11_variance(z, 0.1, 0.1, 0.8);
    double var = 0.0;
    for (double x : z) var += x * x;
    double mean = 0.0;
    for (double x : z) mean += x;
    mean /= z.size();
    var = var / z.size() - mean * mean;
    CHECK(v[0] == doctest::Approx(var).epsilon(1e-3));
    CHECK(v[1] == doctest::Approx(0.1 + 0.1 * z[0] * z[0] + 0.8 * v[0]).epsilon(1e-12));
  }

  TEST_CASE("residuals of a correctly specified fit pass the Engle test") {
    std::size_t passes = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto r = simulate_garch11(0.05, 0.10, 0.85, 2000, Innovation::normal, 0.0, 500 + seed);
      passes += engle_arch_lm(garch11_fit(r, Innovation::normal).residuals, 1).p_value > 0.05 ? 1 : 0;
    }
    CHECK(passes >= 90);
  }

  TEST_CASE("Engle LM size and power") {
    int rejections = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      if (engle_arch_lm(normals(5000, 100 + seed), 1).p_value < 0.05) ++rejections;
    }
    // Binomial(200, 0.05): mean 10, sd about 3.1.
    CHECK(rejections >= 2);
    CHECK(rejections <= 20);
    const auto g = simulate_garch11(0.05, 0.10, 0.85, 5000, Innovation::normal, 0.0, 9);
    const auto t = engle_arch_lm(g, 5);
    CHECK(t.p_value < 0.001);
    CHECK(t.lags == 5);
    CHECK_THROWS(engle_arch_lm(normals(5, 1), 5));
  }

  TEST_CASE("empirical Frechet transform") {
    CHECK(empirical_frechet(std::vector<double>{3.0})[0] == doctest::Approx(1.4427).epsilon(1e-4));
    std::vector<double> v(99);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(static_cast<double>(i)) + i * 1e-3;
    const auto y = empirical_frechet(v);
    const auto imax = std::max_element(v.begin(), v.end()) - v.begin();
    CHECK(y[imax] == doctest::Approx(99.499).epsilon(1e-4));
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[i] < v[j]) CHECK(y[i] < y[j]);
      }
      CHECK(y[i] > 0.0);
    }
    std::vector<double> transformed(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) transformed[i] = std::exp(2 * v[i]) - 4;
    CHECK(empirical_frechet(transformed) == y);
    const auto ties = empirical_frechet(std::vector<double>{1.0, 2.0, 2.0, 3.0});
    CHECK(ties[1] == ties[2]);
    CHECK(ties[1] == doctest::Approx(-1.0 / std::log(2.5 / 5.0)).epsilon(1e-14));
  }

  TEST_CASE("pseudo-polar coordinates") {
    const std::vector<double> y1{2.0, 3.0, 0.7}, y2{2.0, 1.0, 5.2}, x{0.0, 0.5, 1.0};
    const auto pp = pseudo_polar(y1, y2, x);
    CHECK(pp.records[0].w == 0.5);
    CHECK(pp.records[1].r == 4.0);
    CHECK(pp.records[1].w == 0.75);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(pp.records[i].r * pp.records[i].w - y1[i]) < 1e-12);
      CHECK(std::abs(pp.records[i].r * (1 - pp.records[i].w) - y2[i]) < 1e-12);
      CHECK(pp.records[i].x == x[i]);
    }
    CHECK_THROWS_AS(pseudo_polar(std::vector<double>{-1.0}, std::vector<double>{1.0}, std::vector<double>{0.0}),
                    DomainError);
  }

  TEST_CASE("quantile spline on i.i.d. radii") {
    std::mt19937_64 gen(31);
    std::exponential_distribution<double> e(1.0);
    const std::size_t n = 2000;
    std::vector<double> x(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i) / (n - 1);
      r[i] = e(gen);
    }
    std::vector<double> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    const double q95 = sorted[static_cast<std::size_t>(0.95 * n)];
    const auto spline = quantile_spline_threshold(x, r);
    // An unpenalized 14-coefficient fit wiggles pointwise; its average level and optimality are stable.
    double level = 0.0;
    for (int k = 0; k < 200; ++k) level += spline((k + 0.5) / 200) / 200;
    CHECK(std::abs(level - q95) < 0.05 * q95);
    auto pinball = [&](const std::vector<double>& coef) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto basis = spline.basis(x[i]);
        double fit = 0.0;
        for (std::size_t j = 0; j < coef.size(); ++j) fit += basis[j] * coef[j];
        const double d = r[i] - fit;
        loss += d >= 0 ? 0.95 * d : -0.05 * d;
      }
      return loss;
    };
    const std::vector<double> coef(spline.coefficients().begin(), spline.coefficients().end());
    const double best = pinball(coef);
    CHECK(best == doctest::Approx(spline.pinball_loss()).epsilon(1e-9));
    CHECK(best < pinball(std::vector<double>(coef.size(), q95)));
    for (std::size_t j = 0; j < coef.size(); ++j) {
      for (double delta : {-0.02, 0.02}) {
        auto moved = coef;
        moved[j] += delta;
        CHECK(pinball(moved) >= best - 1e-9);
      }
    }
    CHECK(std::abs(spline.exceedance_fraction() - 0.05) < 0.02);
    CHECK(spline.knots().size() == 10 + 8);
    CHECK(spline.coefficients().size() == 14);
    double basis_sum = 0.0;
    for (double b : spline.basis(0.37)) basis_sum += b;
    CHECK(basis_sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spline(-5.0) == spline(0.0));

    PseudoPolar pp;
    for (std::size_t i = 0; i < n; ++i) pp.records.push_back({x[i], r[i], 0.3});
    const auto kept = exceedance_angles(pp, [&](double v) { return spline(v); });
    CHECK(std::abs(static_cast<double>(kept.size()) / n - 0.05) < 0.02);
    CHECK(exceedance_angles(pp, [](double) { return -1.0; }).size() == n);
    CHECK_THROWS_AS(exceedance_angles(pp, [&](double) { return sorted.back() + 1; }), EmptySampleError);

    QuantileSplineOptions bad;
    bad.q = 1.0;
    CHECK_THROWS_AS(quantile_spline_threshold(x, r, bad), DomainError);
  }

  TEST_CASE("quantile spline follows a trend") {
    std::mt19937_64 gen(33);
    std::exponential_distribution<double> e(1.0);
    const std::size_t n = 3000;
    std::vector<double> x(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i) / (n - 1);
      r[i] = (1.0 + 2.0 * x[i]) * e(gen);
    }
    const auto spline = quantile_spline_threshold(x, r);
    const double q = -std::log(0.05);
    // Averages over each half of the covariate range track the true quantile line.
    double lower = 0.0, upper = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double t = (k + 0.5) / 200;
      (t < 0.5 ? lower : upper) += spline(t) / 100;
    }
    CHECK(std::abs(lower - 1.5 * q) < 0.1 * 1.5 * q);
    CHECK(std::abs(upper - 2.5 * q) < 0.1 * 2.5 * q);
    CHECK(spline.relative_variation() > 0.5);
  }

  TEST_CASE("quantile spline needs distinct covariates") {
    std::vector<double> x(100), r(100);
    for (std::size_t i = 0; i < 100; ++i) {
      x[i] = static_cast<double>(i % 5);
      r[i] = 1.0 + i;
    }
    try {
      quantile_spline_threshold(x, r);
      FAIL("expected a numeric error");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("fewer knots") != std::string::npos);
    }
  }

  TEST_CASE("synthetic market data") {
    MarketSimulation cfg;
    cfg.n = 300;
    const auto a = simulate_market(cfg, 5);
    const auto b = simulate_market(cfg, 5);
    CHECK(a.prices1.values == b.prices1.values);
    CHECK(a.prices1.size() == 301);
    CHECK(a.prices1.timestamps.front() == "2000-01-03");
    CHECK_NOTHROW(a.prices1.validate());
    CHECK(a.alpha.size() == 300);
  }

  TEST_CASE("end-to-end pipeline recovers the extremal coefficient") {
    MarketSimulation cfg;
    cfg.n = 8000;
    cfg.alpha = [](double) { return 0.5; };
    const auto r = testing_util::run_synthetic_pipeline(cfg, 2014, 4);
    MESSAGE("angles " << r.angles << ", max |C - 2^alpha| " << r.max_error);
    CHECK(r.angles >= 300);
    CHECK(r.max_error < 0.15);
  }
}
