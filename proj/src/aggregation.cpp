#include "disagg/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "disagg/common.hpp"
#include "disagg/csv.hpp"

namespace disagg {

void SupportSpec::validate() const {
    if (cells.empty()) throw std::invalid_argument("support " + name + ": no cells");
    double total = 0.0;
    for (const auto& c : cells) {
        if (!(c.weight >= 0.0)) throw std::invalid_argument("support " + name + ": negative weight");
        total += c.weight;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("support " + name + ": weights sum to " + std::to_string(total));
}

std::vector<double> five_year_average(const PosteriorDraws& draws, const std::string& tract_id,
                                      int end_year) {
    if (end_year - 4 < draws.year0 || end_year >= draws.year0 + draws.T)
        throw std::invalid_argument("five_year_average: window not fully covered");
    SupportSpec spec;
    spec.name = tract_id + "_5yr_" + std::to_string(end_year);
    for (int y = end_year - 4; y <= end_year; ++y) spec.cells.push_back({tract_id, y, 0.2});
    return custom_support(draws, spec);
}

std::vector<double> puma_aggregate(const PosteriorDraws& draws, const ArealHierarchy& h,
                                   const std::string& puma_id, int year) {
    const auto w = population_weights(h, puma_id, year);
    SupportSpec spec;
    spec.name = puma_id + "_1yr_" + std::to_string(year);
    for (const auto& [tract, weight] : w) spec.cells.push_back({tract, year, weight});
    return custom_support(draws, spec);
}

std::vector<double> custom_support(const PosteriorDraws& draws, const SupportSpec& spec) {
    spec.validate();
    std::vector<std::string> missing;
    for (const auto& c : spec.cells)
        if (!draws.has_cell(c.tract_id, c.year))
            missing.push_back(c.tract_id + "/" + std::to_string(c.year));
    if (!missing.empty()) {
        std::string msg = "support " + spec.name + ": missing cells:";
        for (const auto& m : missing) msg += " " + m;
        throw std::invalid_argument(msg);
    }
    const int n = draws.n_draws();
    std::vector<double> out(n, 0.0);
    for (const auto& c : spec.cells) {
        const int col = draws.cell_col(c.tract_id, c.year);
        for (int i = 0; i < n; ++i) out[i] += c.weight * draws.pi(i, col);
    }
    return out;
}

SupportSpec county_3yr_support(const ArealHierarchy& h, const std::string& county_id, int end_year,
                               int year_lo, int year_hi) {
    std::vector<std::string> tracts;
    for (const auto& [tract, county] : h.tract_to_county)
        if (county == county_id) tracts.push_back(tract);
    if (tracts.empty()) throw std::invalid_argument("county " + county_id + " has no tracts");

    SupportSpec spec;
    spec.name = county_id + "_3yr_" + std::to_string(end_year);
    for (int y = end_year - 2; y <= end_year; ++y) {
        // nearest population year when the requested one is absent
        int use_year = y;
        if (!h.populations.count({tracts.front(), y})) {
            int best = -1;
            for (int cand = year_lo; cand <= year_hi; ++cand)
                if (h.populations.count({tracts.front(), cand}) &&
                    (best < 0 || std::abs(cand - y) < std::abs(best - y)))
                    best = cand;
            if (best < 0) throw std::runtime_error("no population data for county " + county_id);
            use_year = best;
        }
        double total = 0.0;
        for (const auto& t : tracts) total += h.population(t, use_year);
        if (!(total > 0.0)) throw std::runtime_error("county " + county_id + ": zero population");
        for (const auto& t : tracts)
            spec.cells.push_back({t, y, h.population(t, use_year) / total / 3.0});
    }
    return spec;
}

std::vector<SupportSpec> load_supports_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto c_name = t.col("support_name");
    const auto c_tract = t.col("tract_id");
    const auto c_year = t.col("year");
    const auto c_w = t.col("weight");
    std::map<std::string, SupportSpec> by_name;
    std::vector<std::string> order;
    for (const auto& r : t.rows) {
        auto& spec = by_name[r[c_name]];
        if (spec.name.empty()) {
            spec.name = r[c_name];
            order.push_back(spec.name);
        }
        spec.cells.push_back({r[c_tract], std::stoi(r[c_year]), std::stod(r[c_w])});
    }
    std::vector<SupportSpec> out;
    for (const auto& n : order) {
        by_name[n].validate();
        out.push_back(std::move(by_name[n]));
    }
    return out;
}

void write_supports_csv(const std::string& path, const std::vector<SupportSpec>& specs,
                        const std::vector<std::string>& comments) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : specs)
        for (const auto& c : s.cells)
            rows.push_back({s.name, c.tract_id, std::to_string(c.year), fmt_double_full(c.weight)});
    write_csv(path, comments, {"support_name", "tract_id", "year", "weight"}, rows);
}

void write_support_summaries_csv(const std::string& path, const std::vector<std::string>& names,
                                 const std::vector<std::vector<double>>& draws,
                                 const std::vector<std::string>& comments) {
    if (names.size() != draws.size())
        throw std::invalid_argument("support summaries: name/draw mismatch");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::vector<double> sorted(draws[i]);
        std::sort(sorted.begin(), sorted.end());
        rows.push_back({names[i], fmt_double(mean_of(draws[i])), fmt_double(sd_of(draws[i])),
                        fmt_double(quantile_sorted(sorted, 0.025)),
                        fmt_double(quantile_sorted(sorted, 0.975))});
    }
    write_csv(path, comments, {"support_name", "mean", "sd", "q025", "q975"}, rows);
}

}  // namespace disagg
