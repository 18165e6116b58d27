#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "disagg/geometry.hpp"
#include "disagg/simulation.hpp"

using namespace disagg;

namespace {

ArealUnit unit_square(const std::string& id) {
    ArealUnit u;
    u.area_id = id;
    u.level = AreaLevel::tract;
    u.rings = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}};
    u.centroid = {0.5, 0.5};
    return u;
}

}  // namespace

TEST_CASE("consistent synthetic hierarchy validates cleanly") {
    SimulationConfig cfg;
    const auto h = make_sim_hierarchy(cfg);
    CHECK(validate_hierarchy(h).empty());
    CHECK(h.tracts.size() == 100);
    CHECK(h.pumas.size() == 4);
    CHECK(h.county_ids().size() == 4);
}

TEST_CASE("hierarchy violations are reported") {
    SimulationConfig cfg;
    auto h = make_sim_hierarchy(cfg);

    SUBCASE("tract missing from the county map") {
        h.tract_to_county.erase(sim_tract_id(0, 0));
        const auto problems = validate_hierarchy(h);
        REQUIRE(problems.size() == 1);
        CHECK(problems.front().find(sim_tract_id(0, 0)) != std::string::npos);
        CHECK(problems.front().find("county") != std::string::npos);
    }
    SUBCASE("puma population off by 5 percent") {
        h.populations[{"p1", 3}] *= 1.05;
        const auto problems = validate_hierarchy(h);
        REQUIRE(problems.size() == 1);
        CHECK(problems.front().find("p1") != std::string::npos);
    }
    SUBCASE("unclosed ring") {
        h.tracts[sim_tract_id(0, 0)].rings[0].pop_back();
        CHECK_FALSE(validate_hierarchy(h).empty());
    }
}

TEST_CASE("quadrature points: containment, weights, determinism") {
    const auto u = unit_square("sq");
    const auto qs = quadrature_points(u, 4, 99);
    CHECK(qs.points.size() == 4);
    CHECK(qs.weight == doctest::Approx(0.25));
    for (const auto& p : qs.points) {
        CHECK(p.x > 0.0);
        CHECK(p.x < 1.0);
        CHECK(p.y > 0.0);
        CHECK(p.y < 1.0);
    }
    const auto qs2 = quadrature_points(u, 4, 99);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(qs.points[i].x == qs2.points[i].x);
        CHECK(qs.points[i].y == qs2.points[i].y);
    }
    const auto one = quadrature_points(u, 1, 5);
    CHECK(one.points.size() == 1);
    CHECK(one.weight == doctest::Approx(1.0));
}

TEST_CASE("quadrature avoids holes (even-odd rule)") {
    ArealUnit u = unit_square("holed");
    u.rings.push_back({{0.3, 0.3}, {0.7, 0.3}, {0.7, 0.7}, {0.3, 0.7}, {0.3, 0.3}});
    const auto qs = quadrature_points(u, 200, 17);
    auto in_hole = [](const Point& p) {
        return p.x > 0.3 && p.x < 0.7 && p.y > 0.3 && p.y < 0.7;
    };
    for (const auto& p : qs.points) CHECK_FALSE(in_hole(p));
    // reference check against a direct even-odd implementation
    for (const auto& p : qs.points) {
        int crossings = 0;
        for (const Ring& r : u.rings)
            for (std::size_t i = 0; i + 1 < r.size(); ++i) {
                const Point &a = r[i], &b = r[i + 1];
                if ((a.y > p.y) != (b.y > p.y) &&
                    p.x < a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x))
                    ++crossings;
            }
        CHECK(crossings % 2 == 1);
    }
}

TEST_CASE("quadrature mean of a linear function converges") {
    const auto u = unit_square("sq");
    double prev_err = 1.0;
    for (int q : {16, 256, 4096}) {
        const auto qs = quadrature_points(u, q, 7);
        double s = 0.0;
        for (const auto& p : qs.points) s += 2.0 * p.x + 3.0 * p.y;
        const double err = std::fabs(s / q - 2.5);
        CHECK(err < prev_err);
        prev_err = err;
    }
}

TEST_CASE("population weights") {
    SimulationConfig cfg;
    auto h = make_sim_hierarchy(cfg);

    SUBCASE("equal populations give equal weights") {
        const auto w = population_weights(h, "p1", 1);
        CHECK(w.size() == 25);
        for (const auto& [id, v] : w) CHECK(v == doctest::Approx(0.04).epsilon(1e-12));
    }
    SUBCASE("weights proportional to population") {
        ArealHierarchy h2;
        h2.pumas["p"] = unit_square("p");
        h2.tracts["a"] = unit_square("a");
        h2.tracts["b"] = unit_square("b");
        h2.tract_to_puma = {{"a", "p"}, {"b", "p"}};
        h2.populations[{"a", 1}] = 100.0;
        h2.populations[{"b", 1}] = 300.0;
        const auto w = population_weights(h2, "p", 1);
        CHECK(w.at("a") == doctest::Approx(0.25));
        CHECK(w.at("b") == doctest::Approx(0.75));
        h2.populations[{"a", 1}] = 0.0;
        h2.populations[{"b", 1}] = 0.0;
        CHECK_THROWS(population_weights(h2, "p", 1));
    }
    SUBCASE("weights sum to one for random populations") {
        Rng rng(21);
        for (int rep = 0; rep < 1000; ++rep) {
            for (int row = 0; row < 5; ++row)
                for (int col = 0; col < 5; ++col)
                    h.populations[{sim_tract_id(row, col), 2}] = rng.uniform(1.0, 1000.0);
            const auto w = population_weights(h, "p1", 2);
            double s = 0.0;
            for (const auto& [id, v] : w) s += v;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("geometry and table files round trip") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "disagg_geo_test";
    fs::create_directories(dir);
    SimulationConfig cfg;
    const auto h = make_sim_hierarchy(cfg);

    std::vector<ArealUnit> units;
    for (const auto& [id, u] : h.tracts) units.push_back(u);
    for (const auto& [id, u] : h.pumas) units.push_back(u);
    write_geometry_json((dir / "g.json").string(), units);
    const auto loaded = load_geometry_json((dir / "g.json").string());
    REQUIRE(loaded.size() == units.size());
    CHECK(loaded.front().area_id == units.front().area_id);
    CHECK(loaded.front().rings.size() == units.front().rings.size());

    write_hierarchy_csv((dir / "h.csv").string(), h);
    write_populations_csv((dir / "p.csv").string(), h);
    ArealHierarchy h2;
    for (auto& u : load_geometry_json((dir / "g.json").string())) {
        if (u.level == AreaLevel::tract)
            h2.tracts[u.area_id] = std::move(u);
        else
            h2.pumas[u.area_id] = std::move(u);
    }
    load_hierarchy_csv((dir / "h.csv").string(), h2);
    load_populations_csv((dir / "p.csv").string(), h2);
    CHECK(validate_hierarchy(h2).empty());
    CHECK(h2.populations.size() == h.populations.size());
    fs::remove_all(dir);
}
