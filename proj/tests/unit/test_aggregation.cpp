#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "disagg/aggregation.hpp"
#include "disagg/common.hpp"
#include "disagg/simulation.hpp"

using namespace disagg;

namespace {

// draws with pi(draw, cell) = base(cell) + draw-specific jitter
PosteriorDraws make_draws(int n_tracts, int T, int n_draws, std::uint64_t seed,
                          bool constant = false) {
    PosteriorDraws d;
    for (int i = 0; i < n_tracts; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "t%03d", i + 1);
        d.tract_ids.push_back(buf);
    }
    d.year0 = 1;
    d.T = T;
    d.scalar_names = {"tau2"};
    d.scalars = Eigen::MatrixXd::Zero(n_draws, 1);
    d.pi.resize(n_draws, n_tracts * T);
    Rng rng(seed);
    for (int c = 0; c < n_tracts * T; ++c) {
        const double base = constant ? 0.25 : rng.uniform(0.1, 0.9);
        for (int i = 0; i < n_draws; ++i)
            d.pi(i, c) = std::clamp(base + (constant ? 0.0 : 0.03 * rng.normal()), 0.001, 0.999);
    }
    return d;
}

}  // namespace

TEST_CASE("five year averages") {
    auto d = make_draws(2, 6, 200, 3);

    SUBCASE("constant series returns the constant") {
        for (int c = 0; c < d.pi.cols(); ++c) d.pi.col(c).setConstant(0.2);
        const auto avg = five_year_average(d, "t001", 5);
        for (double v : avg) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("linear series returns the midpoint") {
        for (int y = 1; y <= 6; ++y)
            d.pi.col(d.cell_col("t001", y)).setConstant(0.1 * y);
        const auto avg = five_year_average(d, "t001", 5);
        for (double v : avg) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("equals the equivalent support spec") {
        const auto avg = five_year_average(d, "t002", 6);
        SupportSpec spec;
        spec.name = "s";
        for (int y = 2; y <= 6; ++y) spec.cells.push_back({"t002", y, 0.2});
        const auto via_spec = custom_support(d, spec);
        for (std::size_t i = 0; i < avg.size(); ++i)
            CHECK(avg[i] == doctest::Approx(via_spec[i]).epsilon(1e-12));
    }
    SUBCASE("incomplete window errors") {
        CHECK_THROWS_AS(five_year_average(d, "t001", 4), std::invalid_argument);
        CHECK_THROWS_AS(five_year_average(d, "t001", 7), std::invalid_argument);
    }
}

TEST_CASE("puma aggregation uses population weights") {
    SimulationConfig cfg;
    cfg.T = 5;  // hierarchy populations cover the draw years
    auto h = make_sim_hierarchy(cfg);
    PosteriorDraws d;
    for (const auto& [id, u] : h.tracts) d.tract_ids.push_back(id);
    d.year0 = 1;
    d.T = 3;
    d.scalar_names = {"tau2"};
    const int n = 150;
    d.scalars = Eigen::MatrixXd::Zero(n, 1);
    d.pi = Eigen::MatrixXd::Constant(n, 100 * 3, 0.3);

    SUBCASE("equal populations, constant field") {
        const auto agg = puma_aggregate(d, h, "p1", 2);
        for (double v : agg) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("two-tract pumas with unequal populations") {
        // make tract t0101 dominate p1 in year 2
        for (int row = 0; row < 5; ++row)
            for (int col = 0; col < 5; ++col) h.populations[{sim_tract_id(row, col), 2}] = 0.0;
        h.populations[{sim_tract_id(0, 0), 2}] = 100.0;
        h.populations[{sim_tract_id(0, 1), 2}] = 300.0;
        d.pi.col(d.cell_col(sim_tract_id(0, 0), 2)).setConstant(0.0);
        d.pi.col(d.cell_col(sim_tract_id(0, 1), 2)).setConstant(0.4);
        const auto agg = puma_aggregate(d, h, "p1", 2);
        for (double v : agg) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("population scaling leaves the aggregate unchanged") {
        const auto before = puma_aggregate(d, h, "p3", 1);
        for (auto& [key, pop] : h.populations) pop *= 10.0;
        const auto after = puma_aggregate(d, h, "p3", 1);
        for (std::size_t i = 0; i < before.size(); ++i)
            CHECK(before[i] == doctest::Approx(after[i]).epsilon(1e-12));
    }
}

TEST_CASE("custom supports") {
    auto d = make_draws(3, 5, 300, 9);

    SUBCASE("identity") {
        SupportSpec spec{"one", {{"t002", 3, 1.0}}};
        const auto out = custom_support(d, spec);
        const auto direct = d.pi_draws("t002", 3);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == direct[i]);
    }
    SUBCASE("uniform field aggregates to itself") {
        auto dc = make_draws(3, 5, 300, 9, true);
        SupportSpec spec{"mix",
                         {{"t001", 1, 0.25}, {"t002", 2, 0.25}, {"t003", 3, 0.25}, {"t001", 5, 0.25}}};
        for (double v : custom_support(dc, spec)) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("missing cells are listed") {
        SupportSpec spec{"bad", {{"t009", 1, 0.5}, {"t001", 99, 0.5}}};
        CHECK_THROWS_WITH_AS(custom_support(d, spec), doctest::Contains("t009"),
                             std::invalid_argument);
    }
    SUBCASE("weight validation") {
        SupportSpec spec{"w", {{"t001", 1, 0.7}}};
        CHECK_THROWS_AS(custom_support(d, spec), std::invalid_argument);
        spec.cells[0].weight = -1.0;
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
        spec.cells.clear();
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
}

TEST_CASE("aggregates stay within constituent bounds and are linear") {
    auto d = make_draws(4, 4, 250, 21);
    SupportSpec a{"a", {{"t001", 1, 0.5}, {"t002", 2, 0.5}}};
    SupportSpec b{"b", {{"t003", 3, 0.3}, {"t004", 4, 0.7}}};
    const auto da = custom_support(d, a);
    const auto db = custom_support(d, b);

    // per-draw monotonicity
    for (int i = 0; i < d.n_draws(); ++i) {
        const double v1 = d.pi(i, d.cell_col("t001", 1));
        const double v2 = d.pi(i, d.cell_col("t002", 2));
        CHECK(da[i] >= std::min(v1, v2) - 1e-12);
        CHECK(da[i] <= std::max(v1, v2) + 1e-12);
    }

    // convex combination of supports equals combination of aggregates
    const double lam = 0.35;
    SupportSpec mix{"mix", {}};
    for (const auto& c : a.cells) mix.cells.push_back({c.tract_id, c.year, lam * c.weight});
    for (const auto& c : b.cells) mix.cells.push_back({c.tract_id, c.year, (1.0 - lam) * c.weight});
    const auto dm = custom_support(d, mix);
    for (int i = 0; i < d.n_draws(); ++i)
        CHECK(dm[i] == doctest::Approx(lam * da[i] + (1.0 - lam) * db[i]).epsilon(1e-10));
}

TEST_CASE("county 3-year supports compose correctly") {
    SimulationConfig cfg;
    cfg.T = 6;
    auto h = make_sim_hierarchy(cfg);
    auto d = make_draws(1, 1, 150, 1);  // replaced below
    {
        PosteriorDraws dd;
        for (const auto& [id, u] : h.tracts) dd.tract_ids.push_back(id);
        dd.year0 = 1;
        dd.T = 6;
        dd.scalar_names = {"tau2"};
        dd.scalars = Eigen::MatrixXd::Zero(150, 1);
        dd.pi.resize(150, 600);
        Rng rng(5);
        for (int c = 0; c < 600; ++c) {
            const double base = rng.uniform(0.1, 0.9);
            for (int i = 0; i < 150; ++i)
                dd.pi(i, c) = std::clamp(base + 0.02 * rng.normal(), 0.01, 0.99);
        }
        d = std::move(dd);
    }

    const auto spec = county_3yr_support(h, "c1", 5, 1, 6);
    spec.validate();
    const auto combined = custom_support(d, spec);

    // equals the average of three yearly county aggregates
    std::vector<std::vector<double>> yearly;
    for (int y = 3; y <= 5; ++y) {
        SupportSpec ys;
        ys.name = "c1_" + std::to_string(y);
        double total = 0.0;
        std::vector<std::string> tracts;
        for (const auto& [tract, county] : h.tract_to_county)
            if (county == "c1") {
                tracts.push_back(tract);
                total += h.population(tract, y);
            }
        for (const auto& t : tracts) ys.cells.push_back({t, y, h.population(t, y) / total});
        yearly.push_back(custom_support(d, ys));
    }
    for (int i = 0; i < d.n_draws(); ++i) {
        const double avg = (yearly[0][i] + yearly[1][i] + yearly[2][i]) / 3.0;
        CHECK(combined[i] == doctest::Approx(avg).epsilon(1e-10));
    }
}

TEST_CASE("support CSV round trip") {
    namespace fs = std::filesystem;
    const auto path = (fs::temp_directory_path() / "disagg_supports.csv").string();
    std::vector<SupportSpec> specs{{"s1", {{"t001", 1, 0.5}, {"t002", 2, 0.5}}},
                                   {"s2", {{"t001", 3, 1.0}}}};
    write_supports_csv(path, specs);
    const auto loaded = load_supports_csv(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].name == "s1");
    CHECK(loaded[0].cells.size() == 2);
    CHECK(loaded[1].cells[0].weight == doctest::Approx(1.0));
    fs::remove(path);
}
