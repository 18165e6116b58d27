#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace disagg {

// One areal survey record: an estimated proportion for the l-year period
// ending at end_year, with its design-based standard error.
struct SurveyEstimate {
    std::string area_id;
    int period_len = 1;
    int end_year = 0;
    double estimate = 0.0;   // proportion in [0,1]
    double std_error = 0.0;  // design-based SE
    std::optional<long> raw_sample_size;
};

// validation problems, empty when the record is well formed
std::vector<std::string> validate_estimate(const SurveyEstimate& est);

// Working observation: the simple-random-sample size whose binomial
// estimator variance matches the design-based variance, and the matching
// number of cases.
struct EffectiveCounts {
    long ess = 0;
    long enc = 0;
    bool clamped = false;  // the estimate was clamped away from {0,1}
};

struct DesignEffectSpec {
    double d = 1.0;            // design effect, >= 1
    long srs_sample_size = 1;  // SRS size the noise is calibrated to
};

inline constexpr double kDefaultClampEps = 0.005;

// ESS = [ z'(1-z') / tau^2 ], z' clamped into [eps, 1-eps], floored at 1.
// Rounds half away from zero. Throws on tau = 0 or non-finite inputs.
long effective_sample_size(const SurveyEstimate& est, double eps, bool* clamped = nullptr);

// ENC = [ ess * z' ], capped into [0, ess].
long effective_number_of_cases(long ess, const SurveyEstimate& est, double eps);

EffectiveCounts effective_counts(const SurveyEstimate& est, double eps);

// Logit-scale noise variance whose delta-method image equals d times the
// SRS variance of a proportion estimator: used by the simulation harness.
double logit_noise_variance(double pi_true, const DesignEffectSpec& spec);

// estimate CSV: area_id,period_len,end_year,estimate,std_error[,sample_size]
std::vector<SurveyEstimate> load_estimates_csv(const std::string& path);
void write_estimates_csv(const std::string& path, const std::vector<SurveyEstimate>& ests,
                         const std::vector<std::string>& comments = {});

}  // namespace disagg
