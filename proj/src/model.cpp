#include "disagg/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "disagg/common.hpp"

namespace disagg {

void Priors::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("prior ") + name + " must be > 0");
    };
    pos(tau2_shape, "tau2_shape");
    pos(tau2_rate, "tau2_rate");
    pos(tauC2_shape, "tauC2_shape");
    pos(tauC2_rate, "tauC2_rate");
    pos(sigma2_shape, "sigma2_shape");
    pos(sigma2_rate, "sigma2_rate");
    pos(phi_shape, "phi_shape");
    pos(phi_rate, "phi_rate");
    if (!(nu_lo >= 0.0 && nu_hi <= 2.0 && nu_lo < nu_hi))
        throw std::invalid_argument("prior nu support must be within (0,2)");
    if (!(alpha_lo >= 0.0 && alpha_hi <= 1.0 && alpha_lo < alpha_hi))
        throw std::invalid_argument("prior alpha support must be within (0,1)");
}

int ModelFrame::tract_index(const std::string& id) const {
    auto it = std::lower_bound(tract_ids.begin(), tract_ids.end(), id);
    if (it == tract_ids.end() || *it != id) return -1;
    return static_cast<int>(it - tract_ids.begin());
}

ModelFrame make_frame(const ArealHierarchy& h, int year0, int year1) {
    if (year1 < year0) throw std::invalid_argument("frame: empty year window");
    ModelFrame f;
    f.year0 = year0;
    f.T = year1 - year0 + 1;
    for (const auto& [id, u] : h.tracts) f.tract_ids.push_back(id);
    std::sort(f.tract_ids.begin(), f.tract_ids.end());
    std::set<std::string> counties;
    for (const auto& id : f.tract_ids) {
        auto it = h.tract_to_county.find(id);
        if (it == h.tract_to_county.end())
            throw std::invalid_argument("frame: tract " + id + " has no county");
        counties.insert(it->second);
    }
    f.county_ids.assign(counties.begin(), counties.end());
    f.tract_county.resize(f.tract_ids.size());
    for (std::size_t i = 0; i < f.tract_ids.size(); ++i) {
        const auto& c = h.tract_to_county.at(f.tract_ids[i]);
        f.tract_county[i] = static_cast<int>(
            std::lower_bound(f.county_ids.begin(), f.county_ids.end(), c) - f.county_ids.begin());
    }
    return f;
}

std::pair<long, long> raw_counts(const SurveyEstimate& est) {
    if (!est.raw_sample_size)
        throw std::invalid_argument("raw counts need a sample size for " + est.area_id);
    const long m = *est.raw_sample_size;
    if (m < 1) throw std::invalid_argument("non-positive sample size for " + est.area_id);
    const long q = std::clamp<long>(std::llround(static_cast<double>(m) * est.estimate), 0, m);
    return {m, q};
}

std::vector<ModelObservation> assemble_observations(const std::vector<SurveyEstimate>& estimates,
                                                    const ArealHierarchy& h,
                                                    const ModelFrame& frame, double eps,
                                                    CountMode mode) {
    std::vector<ModelObservation> out;
    out.reserve(estimates.size());
    for (const auto& est : estimates) {
        const auto problems = validate_estimate(est);
        if (!problems.empty()) throw std::invalid_argument(problems.front());
        if (est.end_year < frame.year0 || est.end_year >= frame.year0 + frame.T)
            throw std::invalid_argument(est.area_id + ": end year " +
                                        std::to_string(est.end_year) + " outside the window");

        ModelObservation obs;
        obs.area_id = est.area_id;
        obs.end_year = est.end_year;
        if (mode == CountMode::effective) {
            const auto c = effective_counts(est, eps);
            obs.ess = c.ess;
            obs.enc = c.enc;
            obs.clamped = c.clamped;
        } else {
            const auto [m, q] = raw_counts(est);
            obs.ess = m;
            obs.enc = q;
        }

        if (est.period_len == 5 && h.tracts.count(est.area_id)) {
            obs.kind = ObsKind::tract_5yr;
            if (est.end_year - 4 < frame.year0)
                throw std::invalid_argument(est.area_id + ": 5-year window starts before year " +
                                            std::to_string(frame.year0));
            const int ti = frame.tract_index(est.area_id);
            if (ti < 0) throw std::invalid_argument("tract " + est.area_id + " not in frame");
            for (int y = est.end_year - 4; y <= est.end_year; ++y) {
                obs.cells.push_back(frame.cell(ti, y));
                obs.weights.push_back(0.2);
            }
        } else if (est.period_len == 1 && h.pumas.count(est.area_id)) {
            obs.kind = ObsKind::puma_1yr;
            const auto w = population_weights(h, est.area_id, est.end_year);
            for (const auto& [tract, weight] : w) {
                const int ti = frame.tract_index(tract);
                if (ti < 0) throw std::invalid_argument("tract " + tract + " not in frame");
                obs.cells.push_back(frame.cell(ti, est.end_year));
                obs.weights.push_back(weight);
            }
        } else {
            throw std::invalid_argument(est.area_id + ": record is neither a 5-year tract nor a " +
                                        "1-year puma estimate");
        }
        out.push_back(std::move(obs));
    }
    return out;
}

double linear_predictor(const ModelState& state, const Eigen::MatrixXd& B, const ModelFrame& frame,
                        int tract_index, int year) {
    const int c = frame.cell(tract_index, year);
    double v = state.mu(year - frame.year0) + state.xi(frame.tract_county[tract_index]) +
               state.eps_tilde(c);
    const auto& eta_t = state.chain.eta[year - frame.year0];
    const int r = static_cast<int>(eta_t.front().size());
    for (std::size_t b = 0; b < eta_t.size(); ++b)
        v += B.row(tract_index).segment(static_cast<Eigen::Index>(b) * r, r).dot(eta_t[b]);
    return v;
}

}  // namespace disagg
