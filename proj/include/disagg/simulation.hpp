#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "disagg/design_effect.hpp"
#include "disagg/geometry.hpp"
#include "disagg/mcmc.hpp"
#include "disagg/metrics.hpp"
#include "disagg/model.hpp"

namespace disagg {

// Synthetic-data settings on the 10x10 unit grid: 100 equal-population
// tracts grouped into 4 regions of 25 that play the puma role.
struct SimulationConfig {
    int setting = 1;  // 1 iid, 2 +spatial field, 3 +trend, 4 +both
    int study = 1;    // 1: fixed logit noise, 2: design-effect calibrated noise
    int T = 10;
    int replicates = 30;

    double covariate_sd = 1.0;     // x(A) ~ N(0, sd^2)
    double noise_sd = 0.2;         // e_t(A)
    double trend_a0 = -1.0;
    double trend_a1 = 0.2;
    MaternParams gp{1.0, 0.5, 1.0};  // latent spatial field

    double obs_logit_sd = 0.15;  // study 1 noise
    double design_effect = 2.0;  // study 2
    long srs_m = 100;            // study 2 per-year SRS size

    // counties for the cluster effects: the 4 regions, or a 5x5 grid of
    // 2x2-tract counties used by the end-to-end prediction fixture
    enum class CountyLayout { regions, grid2x2 };
    CountyLayout county_layout = CountyLayout::regions;

    std::uint64_t seed = 1;

    void validate() const;
};

inline constexpr int kSimGridSide = 10;
inline constexpr int kSimTracts = 100;

// grid ids: tracts t0101..t1010 (row-major), pumas p1..p4, counties per layout
std::string sim_tract_id(int row, int col);
ArealHierarchy make_sim_hierarchy(const SimulationConfig& cfg);

// truths pi_t(A_ig): T x 100 (columns in sorted tract order)
Eigen::MatrixXd gen_true_proportions(const SimulationConfig& cfg, Rng& rng);

// pseudo-survey records: tract 5-year estimates for t in [5, T], puma 1-year
// estimates for every t, with design variances propagated from the
// generating noise; study 2 also carries raw sample sizes for the baseline
std::vector<SurveyEstimate> gen_observed(const SimulationConfig& cfg,
                                         const Eigen::MatrixXd& truths, Rng& rng);

enum class ModelChoice { proposed, standard_binomial };

struct StudyFitConfig {
    int M = 2, J = 4, r = 9, q = 16;
    double eps = kDefaultClampEps;
    double jitter = 1e-8;
    long iters = 10000, burnin = 2000, thin = 5;
    Priors priors;
};

struct StudyResult {
    // per time index (1-based year t), averaged over replicates
    std::vector<double> cov95_pt, cov50_pt, cov95_joint, cov50_joint;
    std::vector<double> mse, mae, msre, mare;
    int replicates_used = 0;
    int replicates_failed = 0;

    double overall(const std::vector<double>& per_t) const;
};

StudyResult run_study(const SimulationConfig& cfg, const StudyFitConfig& fit, ModelChoice model);

void write_study_csv(const std::string& path, const StudyResult& res,
                     const std::vector<std::string>& comments = {});

}  // namespace disagg
