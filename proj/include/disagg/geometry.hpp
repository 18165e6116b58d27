#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace disagg {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Ring = std::vector<Point>;  // closed: first point equals last

enum class AreaLevel { tract, puma, county, custom };

AreaLevel area_level_from_string(const std::string& s);
std::string to_string(AreaLevel level);

struct ArealUnit {
    std::string area_id;
    AreaLevel level = AreaLevel::tract;
    std::vector<Ring> rings;  // rings[0] outer boundary, later rings may be holes
    Point centroid;

    // signed shoelace area of the outer ring
    double outer_area() const;
    // even-odd rule across all rings, so holes are excluded
    bool contains(const Point& p) const;
    void bounding_box(Point& lo, Point& hi) const;
};

// key for the (area, year) population table
struct AreaYear {
    std::string area_id;
    int year = 0;
    bool operator<(const AreaYear& o) const {
        return area_id < o.area_id || (area_id == o.area_id && year < o.year);
    }
};

struct ArealHierarchy {
    std::map<std::string, ArealUnit> tracts;
    std::map<std::string, ArealUnit> pumas;
    std::map<std::string, std::string> tract_to_puma;
    std::map<std::string, std::string> tract_to_county;
    std::map<AreaYear, double> populations;

    // tract ids of a puma, sorted
    std::vector<std::string> puma_tracts(const std::string& puma_id) const;
    std::vector<std::string> county_ids() const;
    double population(const std::string& area_id, int year) const;
};

struct QuadratureSet {
    std::string area_id;
    std::vector<Point> points;
    double weight = 0.0;  // equal weights summing to 1
};

// Reports invariant violations; empty result means the hierarchy is valid.
std::vector<std::string> validate_hierarchy(const ArealHierarchy& h);

// q points uniform over the polygon by rejection from the bounding box,
// deterministic for a given seed. Throws after 1e6 failed proposals.
QuadratureSet quadrature_points(const ArealUnit& unit, int q, std::uint64_t seed);

// population shares of a puma's tracts for one year, summing to 1
std::map<std::string, double> population_weights(const ArealHierarchy& h,
                                                 const std::string& puma_id, int year);

// geometry file: JSON list of {"area_id","level","rings","centroid"}
std::vector<ArealUnit> load_geometry_json(const std::string& path);
void write_geometry_json(const std::string& path, const std::vector<ArealUnit>& units);

// hierarchy file: CSV tract_id,puma_id,county_id
void load_hierarchy_csv(const std::string& path, ArealHierarchy& h);
void write_hierarchy_csv(const std::string& path, const ArealHierarchy& h,
                         const std::vector<std::string>& comments = {});

// population file: CSV area_id,year,population
void load_populations_csv(const std::string& path, ArealHierarchy& h);
void write_populations_csv(const std::string& path, const ArealHierarchy& h,
                           const std::vector<std::string>& comments = {});

}  // namespace disagg
