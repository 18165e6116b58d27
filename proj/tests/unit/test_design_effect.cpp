#include <doctest.h>

#include <cmath>

#include "disagg/common.hpp"
#include "disagg/design_effect.hpp"

using namespace disagg;

namespace {
SurveyEstimate make_est(double z, double se) {
    SurveyEstimate e;
    e.area_id = "a";
    e.period_len = 5;
    e.end_year = 2010;
    e.estimate = z;
    e.std_error = se;
    return e;
}
}  // namespace

TEST_CASE("effective sample size arithmetic") {
    bool clamped = false;
    CHECK(effective_sample_size(make_est(0.5, 0.05), 0.005, &clamped) == 100);
    CHECK_FALSE(clamped);
    CHECK(effective_sample_size(make_est(0.3, std::sqrt(0.0042)), 0.005) == 50);
    // zero-valued estimate with a large design SE: clamped and floored at 1
    CHECK(effective_sample_size(make_est(0.0, 0.19), 0.005, &clamped) == 1);
    CHECK(clamped);
}

TEST_CASE("effective sample size error paths") {
    CHECK_THROWS_WITH_AS(effective_sample_size(make_est(0.4, 0.0), 0.005),
                         doctest::Contains("zero design variance"), std::invalid_argument);
    CHECK_THROWS_AS(effective_sample_size(make_est(std::nan(""), 0.1), 0.005),
                    std::invalid_argument);
    CHECK_THROWS_AS(effective_sample_size(make_est(0.4, std::nan("")), 0.005),
                    std::invalid_argument);
    CHECK_THROWS_AS(effective_sample_size(make_est(0.4, 0.1), 0.6), std::invalid_argument);
}

TEST_CASE("effective number of cases") {
    CHECK(effective_number_of_cases(100, make_est(0.5, 0.1), 0.005) == 50);
    CHECK(effective_number_of_cases(50, make_est(0.0, 0.1), 0.005) == 0);
    CHECK(effective_number_of_cases(73, make_est(0.64, 0.1), 0.005) == 47);
    CHECK_THROWS_AS(effective_number_of_cases(0, make_est(0.5, 0.1), 0.005),
                    std::invalid_argument);
}

TEST_CASE("enc/ess recovers the clamped estimate within rounding") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double z = rng.uniform(0.0, 1.0);
        const double se = rng.uniform(0.005, 0.3);
        const auto c = effective_counts(make_est(z, se), 0.005);
        REQUIRE(c.ess >= 1);
        CHECK(c.enc >= 0);
        CHECK(c.enc <= c.ess);
        const double zprime = clamp01(z, 0.005);
        CHECK(std::fabs(static_cast<double>(c.enc) / c.ess - zprime) <=
              0.5 / static_cast<double>(c.ess) + 1e-12);
    }
}

TEST_CASE("implied binomial variance reproduces the design variance within rounding") {
    Rng rng(4);
    int checked = 0;
    for (int i = 0; i < 5000; ++i) {
        const double z = rng.uniform(0.05, 0.95);
        const double se = rng.uniform(0.01, 0.2);
        const auto c = effective_counts(make_est(z, se), 0.005);
        if (c.ess < 2) continue;
        ++checked;
        const double tau2 = se * se;
        const double zp = clamp01(z, 0.005);
        const double implied = zp * (1.0 - zp) / static_cast<double>(c.ess);
        CHECK(std::fabs(implied - tau2) <=
              tau2 * (1.0 / c.ess + 0.5 / c.ess) + 1e-15);
    }
    CHECK(checked > 1000);
}

TEST_CASE("logit noise variance closed forms") {
    CHECK(logit_noise_variance(0.5, {1.0, 100}) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(logit_noise_variance(0.5, {4.0, 100}) == doctest::Approx(0.16).epsilon(1e-12));
    // identity: v = d / (m pi (1-pi))
    for (double pi : {0.2, 0.35, 0.8}) {
        const double v = logit_noise_variance(pi, {2.0, 150});
        CHECK(v == doctest::Approx(2.0 / (150.0 * pi * (1.0 - pi))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(logit_noise_variance(0.0, {1.0, 100}), std::domain_error);
    CHECK_THROWS_AS(logit_noise_variance(1.0, {1.0, 100}), std::domain_error);
}

TEST_CASE("logit noise variance is increasing in the design effect") {
    for (double pi : {0.2, 0.5, 0.8}) {
        double prev = 0.0;
        for (double d : {1.0, 2.0, 4.0, 8.0}) {
            const double v = logit_noise_variance(pi, {d, 100});
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("Monte Carlo: noisy estimates attain d times the SRS variance") {
    Rng rng(9);
    for (double pi : {0.2, 0.5, 0.8}) {
        for (long m : {250L, 1000L}) {
            for (double d : {1.0, 2.0, 4.0, 8.0}) {
                const double v = logit_noise_variance(pi, {d, m});
                const double sd = std::sqrt(v);
                const int n = 400000;
                double s = 0.0, s2 = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double z = expit(logit(pi) + sd * rng.normal());
                    s += z;
                    s2 += z * z;
                }
                const double mean = s / n;
                const double var = s2 / n - mean * mean;
                const double target = d * pi * (1.0 - pi) / static_cast<double>(m);
                CHECK(std::fabs(var - target) / target < 0.10);
            }
        }
    }
}

TEST_CASE("estimate validation") {
    auto e = make_est(0.5, 0.1);
    CHECK(validate_estimate(e).empty());
    e.estimate = 1.2;
    CHECK_FALSE(validate_estimate(e).empty());
    e.estimate = 0.5;
    e.std_error = -1.0;
    CHECK_FALSE(validate_estimate(e).empty());
}
