#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "angsurf/evaluation.hpp"
#include "angsurf/models.hpp"

using namespace angsurf;

TEST_SUITE("evaluation") {
  TEST_CASE("grids") {
    GridSpec g;
    const auto xg = g.x_grid({-1.0, 3.0});
    CHECK(xg.size() == 201);
    CHECK(xg.front() == -1.0);
    CHECK(xg.back() == 3.0);
    const auto wg = g.w_grid();
    CHECK(wg.size() == 513);
    CHECK(wg.front() == doctest::Approx(1.0 / 1024));
    CHECK(wg.back() == doctest::Approx(1.0 - 1.0 / 1024));
  }

  TEST_CASE("truth against itself and a constant offset") {
    const auto model = symmetric_dirichlet_model();
    SurfaceFunction truth = [&](double w, double x) { return model.density(w, x); };
    SurfaceFunction shifted = [&](double w, double x) { return model.density(w, x) + 0.1; };
    CHECK(iae(truth, truth, model.domain) == 0.0);
    const double unit = iae([](double, double) { return 0.1; }, [](double, double) { return 0.0; }, {0.0, 1.0});
    CHECK(unit == doctest::Approx(0.1 * (1.0 - 2.0 / 1024)).epsilon(1e-12));
    CHECK(iae(shifted, truth, model.domain) == doctest::Approx(0.1 * model.domain.width() * (1.0 - 2.0 / 1024)).epsilon(1e-12));
  }

  TEST_CASE("iae is stable under w-grid refinement") {
    const auto model = logistic_model();
    const std::vector<double> xs = covariate_grid_sampler(model.domain, 300, CovariateScheme::equally_spaced, 0);
    const auto sample = sample_angles(model, xs, 3);
    AngularSurface surf(sample, {0.1, 8.0, 1.0});
    GridSpec coarse, fine;
    fine.w_nodes = 2 * coarse.w_nodes - 1;
    const double a = iae(surf, model, coarse, 2);
    const double b = iae(surf, model, fine, 2);
    CHECK(a > 0.0);
    CHECK(std::abs(a - b) < 0.02 * b);
    SurfaceFunction est = [&](double w, double x) { return surf.h_hat(w, x); };
    SurfaceFunction tr = [&](double w, double x) { return model.density(w, x); };
    GridSpec small{21, 65, 1.0 / 1024};
    CHECK(iae(surf, model, small) == doctest::Approx(iae(est, tr, model.domain, small)).epsilon(1e-12));
  }

  TEST_CASE("excluded truth mass is small and nonnegative") {
    for (const auto& m : {logistic_model(), symmetric_dirichlet_model(), asymmetric_dirichlet_model()}) {
      const double e = excluded_truth_mass(m);
      CHECK(e > -1e-4);
      CHECK(e < 0.05);
    }
  }

  TEST_CASE("miae study bookkeeping and determinism") {
    CvConfig c;
    c.folds = 5;
    c.budget = 30;
    MiaeOptions opts;
    opts.grid = {41, 129, 1.0 / 1024};
    opts.threads = 2;
    const auto r1 = miae_study(logistic_model(), 80, 4, c, WeightScheme::nadaraya_watson, 17, opts);
    const auto r2 = miae_study(logistic_model(), 80, 4, c, WeightScheme::nadaraya_watson, 17, opts);
    CHECK(r1.per_replicate == r2.per_replicate);
    CHECK(r1.n_replicates == 4);
    CHECK(r1.per_replicate.size() + r1.failures.size() == 4);
    REQUIRE(r1.per_replicate.size() >= 2);
    const double mean = std::accumulate(r1.per_replicate.begin(), r1.per_replicate.end(), 0.0) / r1.per_replicate.size();
    CHECK(r1.value == doctest::Approx(mean).epsilon(1e-14));
    double ss = 0.0;
    for (double v : r1.per_replicate) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (r1.per_replicate.size() - 1));
    CHECK(r1.std_error == doctest::Approx(sd / std::sqrt(r1.per_replicate.size())).epsilon(1e-12));
    for (double v : r1.per_replicate) CHECK(v >= 0.0);
  }
}
