#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "disagg/common.hpp"
#include "disagg/metrics.hpp"

using namespace disagg;

TEST_CASE("error metrics arithmetic") {
    const auto m = error_metrics({0.3}, {0.2});
    CHECK(m.mse == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(m.mae == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(m.msre == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(m.mare == doctest::Approx(0.5).epsilon(1e-12));

    const auto z = error_metrics({0.4, 0.6}, {0.4, 0.6});
    CHECK(z.mse == 0.0);
    CHECK(z.mae == 0.0);

    CHECK_THROWS_AS(error_metrics({0.1}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(error_metrics({0.1, 0.2}, {0.1}), std::invalid_argument);
}

TEST_CASE("error metrics match a direct reimplementation on random inputs") {
    Rng rng(3);
    std::vector<double> est(100), truth(100);
    for (int i = 0; i < 100; ++i) {
        est[i] = rng.uniform(0.0, 1.0);
        truth[i] = rng.uniform(0.05, 1.0);
    }
    const auto m = error_metrics(est, truth);
    double mse = 0, mae = 0, msre = 0, mare = 0;
    for (int i = 0; i < 100; ++i) {
        const double d = est[i] - truth[i];
        mse += d * d / 100.0;
        mae += std::fabs(d) / 100.0;
        msre += d * d / truth[i] / 100.0;
        mare += std::fabs(d) / truth[i] / 100.0;
    }
    CHECK(m.mse == doctest::Approx(mse).epsilon(1e-12));
    CHECK(m.mae == doctest::Approx(mae).epsilon(1e-12));
    CHECK(m.msre == doctest::Approx(msre).epsilon(1e-12));
    CHECK(m.mare == doctest::Approx(mare).epsilon(1e-12));
}

TEST_CASE("pointwise intervals") {
    Rng rng(9);
    std::vector<double> draws(20000);
    for (auto& v : draws) v = 0.5 + 0.1 * rng.normal();

    const auto ci = pointwise_ci(draws, 0.95);
    CHECK(0.5 * (ci.lo + ci.hi) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(ci.lo == doctest::Approx(0.5 - 0.196).epsilon(0.02));
    CHECK(ci.hi == doctest::Approx(0.5 + 0.196).epsilon(0.02));

    const auto degenerate = pointwise_ci(draws, 0.0);
    CHECK(degenerate.lo == doctest::Approx(degenerate.hi).epsilon(1e-12));

    CHECK_THROWS_AS(pointwise_ci(std::vector<double>(10, 0.1), 0.95), std::invalid_argument);
}

TEST_CASE("pointwise interval calibration on synthetic posteriors") {
    Rng rng(11);
    int inside = 0;
    const int reps = 2000;
    for (int rep = 0; rep < reps; ++rep) {
        const double truth = rng.normal();
        std::vector<double> draws(400);
        for (auto& v : draws) v = truth + rng.normal();
        const auto ci = pointwise_ci(draws, 0.9);
        // truth plays the posterior-mean role; check nominal-ish content
        double post_draw = truth + rng.normal();
        if (ci.contains(post_draw)) ++inside;
    }
    CHECK(static_cast<double>(inside) / reps == doctest::Approx(0.9).epsilon(0.03));
}

TEST_CASE("joint band k-star matches the analytic max-of-normals quantile") {
    Rng rng(41);
    const int n = 20000, q = 100;
    Eigen::MatrixXd draws(n, q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j) draws(i, j) = rng.normal();
    const auto band = joint_band(draws, 0.95);
    // P(max |Z_j| <= k) = (2 Phi(k) - 1)^100 = 0.95  =>  k = 3.47397886915
    double k_star = 0.0;
    for (int j = 0; j < q; ++j) {
        const double mean = draws.col(j).mean();
        const double sd = std::sqrt((draws.col(j).array() - mean).square().sum() / (n - 1));
        k_star = std::max(k_star, (band[j].hi - mean) / sd);
    }
    CHECK(k_star == doctest::Approx(3.47397886915).epsilon(0.02));

    const auto band50 = joint_band(draws, 0.50);
    double k50 = 0.0;
    for (int j = 0; j < q; ++j) {
        const double mean = draws.col(j).mean();
        const double sd = std::sqrt((draws.col(j).array() - mean).square().sum() / (n - 1));
        k50 = std::max(k50, (band50[j].hi - mean) / sd);
    }
    CHECK(k50 == doctest::Approx(2.70127092465).epsilon(0.02));
}

TEST_CASE("joint bands contain pointwise intervals at the same level") {
    Rng rng(43);
    const int n = 5000, q = 30;
    Eigen::MatrixXd draws(n, q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j) draws(i, j) = 0.3 + 0.05 * j + 0.2 * rng.normal();
    for (double level : {0.5, 0.95}) {
        const auto jb = joint_band(draws, level);
        for (int j = 0; j < q; ++j) {
            const Eigen::VectorXd col = draws.col(j);
            const auto ci = pointwise_ci({col.data(), col.data() + n}, level);
            CHECK(jb[j].lo <= ci.lo + 1e-6);
            CHECK(jb[j].hi >= ci.hi - 1e-6);
        }
    }
}

TEST_CASE("joint band boundary behaviour and degenerate columns") {
    Rng rng(5);
    const int n = 1000;
    Eigen::MatrixXd draws(n, 3);
    for (int i = 0; i < n; ++i) {
        draws(i, 0) = rng.normal();
        draws(i, 1) = 2.0 + rng.normal();
        draws(i, 2) = 7.0;  // constant
    }
    std::vector<int> excluded;
    const auto band = joint_band(draws, 1.0, &excluded);
    REQUIRE(excluded.size() == 1);
    CHECK(excluded[0] == 2);
    // at level 1 the band contains every draw of the kept columns
    for (int i = 0; i < n; ++i) {
        CHECK(band[0].contains(draws(i, 0)));
        CHECK(band[1].contains(draws(i, 1)));
    }
}

TEST_CASE("single-quantity joint band is close to the pointwise interval") {
    Rng rng(59);
    const int n = 100000;
    Eigen::MatrixXd draws(n, 1);
    for (int i = 0; i < n; ++i) draws(i, 0) = rng.normal();
    const auto jb = joint_band(draws, 0.95);
    const Eigen::VectorXd col = draws.col(0);
    const auto ci = pointwise_ci({col.data(), col.data() + n}, 0.95);
    CHECK(jb[0].lo == doctest::Approx(ci.lo).epsilon(0.02));
    CHECK(jb[0].hi == doctest::Approx(ci.hi).epsilon(0.02));
}

TEST_CASE("coverage") {
    std::vector<Interval> iv{{0.0, 1.0}, {2.0, 3.0}, {4.0, 5.0}};
    CHECK(coverage(iv, {0.5, 2.5, 4.5}) == 1.0);
    CHECK(coverage(iv, {5.0, 5.0, 5.0}) == doctest::Approx(1.0 / 3.0));
    CHECK(coverage(iv, {-1.0, 6.0, 7.0}) == 0.0);
    CHECK_THROWS_AS(coverage(iv, {0.1}), std::invalid_argument);
}

TEST_CASE("metrics are permutation invariant") {
    Rng rng(77);
    std::vector<double> est(50), truth(50);
    for (int i = 0; i < 50; ++i) {
        est[i] = rng.uniform(0.0, 1.0);
        truth[i] = rng.uniform(0.1, 1.0);
    }
    const auto a = error_metrics(est, truth);
    std::vector<int> perm(50);
    for (int i = 0; i < 50; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
    std::vector<double> est2(50), truth2(50);
    for (int i = 0; i < 50; ++i) {
        est2[i] = est[perm[i]];
        truth2[i] = truth[perm[i]];
    }
    const auto b = error_metrics(est2, truth2);
    CHECK(a.mse == doctest::Approx(b.mse).epsilon(1e-12));
    CHECK(a.mare == doctest::Approx(b.mare).epsilon(1e-12));
}

TEST_CASE("predictive report on a hand-checked fixture") {
    // three supports, constant predictive draws
    const int n = 200;
    Eigen::MatrixXd draws(n, 3);
    Rng rng(2);
    for (int i = 0; i < n; ++i) {
        draws(i, 0) = 0.2 + 0.01 * rng.normal();
        draws(i, 1) = 0.5 + 0.01 * rng.normal();
        draws(i, 2) = 0.8 + 0.01 * rng.normal();
    }
    SUBCASE("perfect predictions") {
        std::vector<double> truth{draws.col(0).mean(), draws.col(1).mean(), draws.col(2).mean()};
        const auto rep = predictive_report(draws, truth);
        CHECK(rep.bias == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(rep.mspe == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(rep.pi_coverage_95 == 1.0);
    }
    SUBCASE("hand-computed errors") {
        std::vector<double> truth{0.25, 0.5, 0.7};
        const auto rep = predictive_report(draws, truth);
        const double e0 = draws.col(0).mean() - 0.25;
        const double e1 = draws.col(1).mean() - 0.5;
        const double e2 = draws.col(2).mean() - 0.7;
        CHECK(rep.bias == doctest::Approx((e0 + e1 + e2) / 3.0).epsilon(1e-9));
        CHECK(rep.mspe == doctest::Approx((e0 * e0 + e1 * e1 + e2 * e2) / 3.0).epsilon(1e-9));
        CHECK(rep.mape ==
              doctest::Approx((std::fabs(e0) + std::fabs(e1) + std::fabs(e2)) / 3.0).epsilon(1e-9));
        // 0.25 and 0.7 are far outside the +-0.01-scale intervals
        CHECK(rep.pi_coverage_95 == doctest::Approx(1.0 / 3.0));
    }
}
