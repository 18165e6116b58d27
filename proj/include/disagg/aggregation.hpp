#pragma once

#include <string>
#include <vector>

#include "disagg/draws.hpp"
#include "disagg/geometry.hpp"

namespace disagg {

// A prediction support: weighted (tract, year) cells, weights summing to 1.
struct SupportSpec {
    struct Cell {
        std::string tract_id;
        int year = 0;
        double weight = 0.0;
    };
    std::string name;
    std::vector<Cell> cells;

    void validate() const;  // nonempty, weights >= 0 summing to 1 (1e-9)
};

// per-draw arithmetic mean of the five annual proportions ending at end_year
std::vector<double> five_year_average(const PosteriorDraws& draws, const std::string& tract_id,
                                      int end_year);

// per-draw population-weighted mean over the puma's tracts for one year
std::vector<double> puma_aggregate(const PosteriorDraws& draws, const ArealHierarchy& h,
                                   const std::string& puma_id, int year);

// per-draw weighted combination over arbitrary cells
std::vector<double> custom_support(const PosteriorDraws& draws, const SupportSpec& spec);

// 3-year county support ending at end_year: per year, tracts weighted by
// population share within the county, years weighted 1/3. Missing population
// years fall back to the nearest available year.
SupportSpec county_3yr_support(const ArealHierarchy& h, const std::string& county_id, int end_year,
                               int year_lo, int year_hi);

// support file: CSV support_name,tract_id,year,weight
std::vector<SupportSpec> load_supports_csv(const std::string& path);
void write_supports_csv(const std::string& path, const std::vector<SupportSpec>& specs,
                        const std::vector<std::string>& comments = {});

// output: CSV support_name,mean,sd,q025,q975
void write_support_summaries_csv(const std::string& path, const std::vector<std::string>& names,
                                 const std::vector<std::vector<double>>& draws,
                                 const std::vector<std::string>& comments = {});

}  // namespace disagg
