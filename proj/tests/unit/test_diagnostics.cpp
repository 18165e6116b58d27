#include <doctest.h>

#include <cmath>

#include "disagg/common.hpp"
#include "disagg/diagnostics.hpp"

using namespace disagg;

TEST_CASE("geweke calibration on iid chains") {
    Rng rng(101);
    int extreme = 0;
    const int reps = 1000;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<double> chain(10000);
        for (auto& v : chain) v = rng.normal();
        if (std::fabs(geweke_z(chain)) > 3.0) ++extreme;
    }
    // |z| < 3 in at least 99% of replicates
    CHECK(extreme <= reps / 100);
}

TEST_CASE("geweke flags a mean shift and rejects degenerate input") {
    Rng rng(7);
    std::vector<double> chain(2000);
    for (std::size_t i = 0; i < chain.size(); ++i)
        chain[i] = rng.normal() + (i < chain.size() / 2 ? 0.0 : 5.0);
    CHECK(std::fabs(geweke_z(chain)) > 3.0);

    std::vector<double> constant(500, 1.3);
    CHECK_THROWS_AS(geweke_z(constant), std::runtime_error);
    std::vector<double> tiny(50, 0.0);
    CHECK_THROWS_AS(geweke_z(tiny), std::invalid_argument);
}

TEST_CASE("chain ESS calibration") {
    Rng rng(55);

    SUBCASE("iid chain") {
        const int n = 20000;
        std::vector<double> chain(n);
        for (auto& v : chain) v = rng.normal();
        const double ess = chain_ess(chain);
        CHECK(ess > 0.85 * n);
        CHECK(ess < 1.15 * n);
    }
    SUBCASE("AR(1) chain matches the analytic factor") {
        const int n = 200000;
        const double rho = 0.9;
        std::vector<double> chain(n);
        double x = 0.0;
        for (int i = 0; i < n; ++i) {
            x = rho * x + std::sqrt(1.0 - rho * rho) * rng.normal();
            chain[i] = x;
        }
        const double expected = n * (1.0 - rho) / (1.0 + rho);
        CHECK(chain_ess(chain) == doctest::Approx(expected).epsilon(0.15));
    }
    SUBCASE("constant chain") { CHECK(chain_ess(std::vector<double>(500, 2.0)) == 0.0); }
}
