#include "disagg/design_effect.hpp"

#include <cmath>
#include <stdexcept>

#include "disagg/common.hpp"
#include "disagg/csv.hpp"

namespace disagg {

std::vector<std::string> validate_estimate(const SurveyEstimate& est) {
    std::vector<std::string> problems;
    const std::string tag = est.area_id + "/" + std::to_string(est.end_year);
    if (!std::isfinite(est.estimate) || est.estimate < 0.0 || est.estimate > 1.0)
        problems.push_back(tag + ": estimate outside [0,1]");
    if (!std::isfinite(est.std_error) || est.std_error < 0.0)
        problems.push_back(tag + ": negative or non-finite std_error");
    if (est.period_len < 1) problems.push_back(tag + ": period_len < 1");
    if (est.raw_sample_size && *est.raw_sample_size < 1)
        problems.push_back(tag + ": non-positive sample_size");
    return problems;
}

long effective_sample_size(const SurveyEstimate& est, double eps, bool* clamped) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("clamp eps must be in (0, 0.5)");
    if (!std::isfinite(est.estimate) || !std::isfinite(est.std_error))
        throw std::invalid_argument("effective_sample_size: non-finite input for " + est.area_id);
    if (est.std_error == 0.0)
        throw std::invalid_argument("zero design variance for " + est.area_id);
    const double z = clamp01(est.estimate, eps);
    if (clamped) *clamped = (z != est.estimate);
    const double tau2 = est.std_error * est.std_error;
    const long ess = std::llround(z * (1.0 - z) / tau2);
    return std::max<long>(ess, 1);
}

long effective_number_of_cases(long ess, const SurveyEstimate& est, double eps) {
    if (ess < 1) throw std::invalid_argument("effective_number_of_cases: ess < 1");
    const double z = clamp01(est.estimate, eps);
    const long enc = std::llround(static_cast<double>(ess) * z);
    return std::clamp<long>(enc, 0, ess);
}

EffectiveCounts effective_counts(const SurveyEstimate& est, double eps) {
    EffectiveCounts c;
    c.ess = effective_sample_size(est, eps, &c.clamped);
    c.enc = effective_number_of_cases(c.ess, est, eps);
    return c;
}

double logit_noise_variance(double pi_true, const DesignEffectSpec& spec) {
    if (!(pi_true > 0.0 && pi_true < 1.0))
        throw std::domain_error("logit_noise_variance: pi must be in (0,1)");
    if (spec.d < 1.0) throw std::invalid_argument("design effect must be >= 1");
    if (spec.srs_sample_size < 1) throw std::invalid_argument("srs_sample_size must be >= 1");
    const double el = std::exp(logit(pi_true));
    const double num = spec.d * std::pow(el + 1.0, 4) * pi_true * (1.0 - pi_true);
    const double den = static_cast<double>(spec.srs_sample_size) * el * el;
    return num / den;
}

std::vector<SurveyEstimate> load_estimates_csv(const std::string& path) {
    const CsvTable t = read_csv(path);
    const auto c_area = t.col("area_id");
    const auto c_len = t.col("period_len");
    const auto c_year = t.col("end_year");
    const auto c_est = t.col("estimate");
    const auto c_se = t.col("std_error");
    const auto c_n = t.col_opt("sample_size");
    std::vector<SurveyEstimate> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        SurveyEstimate e;
        e.area_id = r[c_area];
        e.period_len = std::stoi(r[c_len]);
        e.end_year = std::stoi(r[c_year]);
        e.estimate = std::stod(r[c_est]);
        e.std_error = std::stod(r[c_se]);
        if (c_n != CsvTable::npos && !r[c_n].empty()) e.raw_sample_size = std::stol(r[c_n]);
        const auto problems = validate_estimate(e);
        if (!problems.empty()) throw std::runtime_error(path + ": " + problems.front());
        out.push_back(std::move(e));
    }
    return out;
}

void write_estimates_csv(const std::string& path, const std::vector<SurveyEstimate>& ests,
                         const std::vector<std::string>& comments) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(ests.size());
    bool any_n = false;
    for (const auto& e : ests) any_n = any_n || e.raw_sample_size.has_value();
    for (const auto& e : ests) {
        std::vector<std::string> r{e.area_id, std::to_string(e.period_len),
                                   std::to_string(e.end_year), fmt_double_full(e.estimate),
                                   fmt_double_full(e.std_error)};
        if (any_n) r.push_back(e.raw_sample_size ? std::to_string(*e.raw_sample_size) : "");
        rows.push_back(std::move(r));
    }
    std::vector<std::string> header{"area_id", "period_len", "end_year", "estimate", "std_error"};
    if (any_n) header.push_back("sample_size");
    write_csv(path, comments, header, rows);
}

}  // namespace disagg
