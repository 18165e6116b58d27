#include "disagg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "disagg/common.hpp"
#include "disagg/csv.hpp"

namespace disagg {

AreaLevel area_level_from_string(const std::string& s) {
    if (s == "tract") return AreaLevel::tract;
    if (s == "puma") return AreaLevel::puma;
    if (s == "county") return AreaLevel::county;
    if (s == "custom") return AreaLevel::custom;
    throw std::invalid_argument("unknown area level: " + s);
}

std::string to_string(AreaLevel level) {
    switch (level) {
        case AreaLevel::tract: return "tract";
        case AreaLevel::puma: return "puma";
        case AreaLevel::county: return "county";
        case AreaLevel::custom: return "custom";
    }
    return "?";
}

double ArealUnit::outer_area() const {
    if (rings.empty()) return 0.0;
    const Ring& r = rings.front();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        s += r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
    return 0.5 * s;
}

bool ArealUnit::contains(const Point& p) const {
    // even-odd crossing count over all rings
    bool inside = false;
    for (const Ring& r : rings) {
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
            const Point& a = r[i];
            const Point& b = r[i + 1];
            if ((a.y > p.y) != (b.y > p.y)) {
                const double xcross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if (p.x < xcross) inside = !inside;
            }
        }
    }
    return inside;
}

void ArealUnit::bounding_box(Point& lo, Point& hi) const {
    lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    hi = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const Ring& r : rings)
        for (const Point& p : r) {
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
}

std::vector<std::string> ArealHierarchy::puma_tracts(const std::string& puma_id) const {
    std::vector<std::string> out;
    for (const auto& [tract, puma] : tract_to_puma)
        if (puma == puma_id) out.push_back(tract);
    return out;
}

std::vector<std::string> ArealHierarchy::county_ids() const {
    std::set<std::string> s;
    for (const auto& [tract, county] : tract_to_county) s.insert(county);
    return {s.begin(), s.end()};
}

double ArealHierarchy::population(const std::string& area_id, int year) const {
    auto it = populations.find({area_id, year});
    if (it == populations.end())
        throw std::runtime_error("no population for " + area_id + " in year " + std::to_string(year));
    return it->second;
}

namespace {

bool ring_closed(const Ring& r) {
    if (r.size() < 4) return false;
    return r.front().x == r.back().x && r.front().y == r.back().y;
}

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
    auto orient = [](const Point& p, const Point& q, const Point& r) {
        const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        return (v > 1e-12) - (v < -1e-12);
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d);
    const int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

bool ring_self_intersects(const Ring& r) {
    const std::size_t n = r.size() - 1;  // closed
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through closure
            if (segments_cross(r[i], r[i + 1], r[j], r[j + 1])) return true;
        }
    return false;
}

void validate_unit(const ArealUnit& u, std::vector<std::string>& problems) {
    if (u.rings.empty()) {
        problems.push_back(u.area_id + ": no rings");
        return;
    }
    for (const Ring& r : u.rings) {
        if (!ring_closed(r)) problems.push_back(u.area_id + ": unclosed or degenerate ring");
        else if (ring_self_intersects(r)) problems.push_back(u.area_id + ": self-intersecting ring");
    }
    if (std::fabs(u.outer_area()) <= 0.0) problems.push_back(u.area_id + ": zero polygon area");
}

}  // namespace

std::vector<std::string> validate_hierarchy(const ArealHierarchy& h) {
    std::vector<std::string> problems;
    for (const auto& [id, u] : h.tracts) validate_unit(u, problems);
    for (const auto& [id, u] : h.pumas) validate_unit(u, problems);

    for (const auto& [id, u] : h.tracts) {
        if (!h.tract_to_puma.count(id)) problems.push_back(id + ": tract not mapped to a puma");
        if (!h.tract_to_county.count(id)) problems.push_back(id + ": tract not mapped to a county");
    }
    for (const auto& [tract, puma] : h.tract_to_puma)
        if (!h.pumas.count(puma)) problems.push_back(tract + ": mapped to unknown puma " + puma);

    for (const auto& [key, pop] : h.populations)
        if (!(pop >= 0.0)) problems.push_back(key.area_id + ": negative population");

    // puma population must equal the sum over its tracts, per year
    std::set<int> years;
    for (const auto& [key, pop] : h.populations)
        if (h.pumas.count(key.area_id)) years.insert(key.year);
    for (const auto& [pid, u] : h.pumas) {
        const auto tracts = h.puma_tracts(pid);
        for (int year : years) {
            auto pit = h.populations.find({pid, year});
            if (pit == h.populations.end()) continue;
            double sum = 0.0;
            bool complete = true;
            for (const auto& t : tracts) {
                auto it = h.populations.find({t, year});
                if (it == h.populations.end()) {
                    complete = false;
                    break;
                }
                sum += it->second;
            }
            if (!complete) continue;
            const double ref = std::max(std::fabs(pit->second), 1.0);
            if (std::fabs(sum - pit->second) > 1e-6 * ref)
                problems.push_back(pid + "/" + std::to_string(year) +
                                   ": puma population does not match tract sum");
        }
    }
    return problems;
}

QuadratureSet quadrature_points(const ArealUnit& unit, int q, std::uint64_t seed) {
    if (q < 1) throw std::invalid_argument("quadrature_points: q must be >= 1");
    Point lo, hi;
    unit.bounding_box(lo, hi);
    if (!(hi.x > lo.x) || !(hi.y > lo.y))
        throw std::runtime_error(unit.area_id + ": degenerate bounding box");
    Rng rng(mix_seed(seed, fnv1a64(unit.area_id)));
    QuadratureSet qs;
    qs.area_id = unit.area_id;
    qs.weight = 1.0 / static_cast<double>(q);
    qs.points.reserve(q);
    long attempts = 0;
    while (static_cast<int>(qs.points.size()) < q) {
        if (++attempts > 1000000)
            throw std::runtime_error(unit.area_id + ": rejection sampling failed (degenerate polygon)");
        Point p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
        if (unit.contains(p)) qs.points.push_back(p);
    }
    return qs;
}

std::map<std::string, double> population_weights(const ArealHierarchy& h,
                                                 const std::string& puma_id, int year) {
    if (!h.pumas.count(puma_id)) throw std::invalid_argument("unknown puma " + puma_id);
    const auto tracts = h.puma_tracts(puma_id);
    if (tracts.empty()) throw std::runtime_error("puma " + puma_id + " has no tracts");
    double total = 0.0;
    std::map<std::string, double> w;
    for (const auto& t : tracts) {
        const double p = h.population(t, year);
        w[t] = p;
        total += p;
    }
    if (!(total > 0.0))
        throw std::runtime_error("puma " + puma_id + ": zero total population in year " +
                                 std::to_string(year));
    for (auto& [k, v] : w) v /= total;
    return w;
}

std::vector<ArealUnit> load_geometry_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    std::vector<ArealUnit> out;
    for (const auto& item : j) {
        ArealUnit u;
        u.area_id = item.at("area_id").get<std::string>();
        u.level = area_level_from_string(item.at("level").get<std::string>());
        for (const auto& ring : item.at("rings")) {
            Ring r;
            for (const auto& pt : ring) r.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
            u.rings.push_back(std::move(r));
        }
        const auto& c = item.at("centroid");
        u.centroid = {c.at(0).get<double>(), c.at(1).get<double>()};
        out.push_back(std::move(u));
    }
    return out;
}

void write_geometry_json(const std::string& path, const std::vector<ArealUnit>& units) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& u : units) {
        nlohmann::json rings = nlohmann::json::array();
        for (const auto& r : u.rings) {
            nlohmann::json ring = nlohmann::json::array();
            for (const auto& p : r) ring.push_back({p.x, p.y});
            rings.push_back(std::move(ring));
        }
        j.push_back({{"area_id", u.area_id},
                     {"level", to_string(u.level)},
                     {"rings", std::move(rings)},
                     {"centroid", {u.centroid.x, u.centroid.y}}});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(1) << "\n";
}

void load_hierarchy_csv(const std::string& path, ArealHierarchy& h) {
    const CsvTable t = read_csv(path);
    const auto c_t = t.col("tract_id");
    const auto c_p = t.col("puma_id");
    const auto c_c = t.col("county_id");
    for (const auto& r : t.rows) {
        h.tract_to_puma[r[c_t]] = r[c_p];
        h.tract_to_county[r[c_t]] = r[c_c];
    }
}

void write_hierarchy_csv(const std::string& path, const ArealHierarchy& h,
                         const std::vector<std::string>& comments) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [tract, puma] : h.tract_to_puma) {
        auto it = h.tract_to_county.find(tract);
        rows.push_back({tract, puma, it == h.tract_to_county.end() ? "" : it->second});
    }
    write_csv(path, comments, {"tract_id", "puma_id", "county_id"}, rows);
}

void load_populations_csv(const std::string& path, ArealHierarchy& h) {
    const CsvTable t = read_csv(path);
    const auto c_a = t.col("area_id");
    const auto c_y = t.col("year");
    const auto c_p = t.col("population");
    for (const auto& r : t.rows)
        h.populations[{r[c_a], std::stoi(r[c_y])}] = std::stod(r[c_p]);
}

void write_populations_csv(const std::string& path, const ArealHierarchy& h,
                           const std::vector<std::string>& comments) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [key, pop] : h.populations)
        rows.push_back({key.area_id, std::to_string(key.year), fmt_double_full(pop)});
    write_csv(path, comments, {"area_id", "year", "population"}, rows);
}

}  // namespace disagg
