#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "disagg/design_effect.hpp"
#include "disagg/geometry.hpp"
#include "disagg/stmra.hpp"

namespace disagg {

enum class ObsKind { tract_5yr, puma_1yr };

// proposed model uses effective counts, the standard-Binomial baseline
// uses raw sample sizes and raw counts
enum class CountMode { effective, raw };

// One working observation: binomial counts plus the (tract, year) cells whose
// probability average forms its success probability.
struct ModelObservation {
    ObsKind kind = ObsKind::tract_5yr;
    std::string area_id;
    int end_year = 0;
    long ess = 0;
    long enc = 0;
    bool clamped = false;
    std::vector<int> cells;       // flattened (tract_index * T + year offset)
    std::vector<double> weights;  // sum to 1
};

struct Priors {
    double tau2_shape = 2.0, tau2_rate = 1.0;    // IG on the cell error variance
    double tauC2_shape = 2.0, tauC2_rate = 1.0;  // IG on the cluster effect variance
    double sigma2_shape = 2.0, sigma2_rate = 1.0;
    double phi_shape = 1.0, phi_rate = 1.0;  // Gamma
    double nu_lo = 0.0, nu_hi = 2.0;         // Uniform support
    double alpha_lo = 0.0, alpha_hi = 1.0;   // Uniform
    // mu_t carries an improper flat prior

    void validate() const;
};

// Indexing frame shared by observations, the sampler, and the outputs.
struct ModelFrame {
    std::vector<std::string> tract_ids;   // sorted
    std::vector<std::string> county_ids;  // sorted
    std::vector<int> tract_county;        // county index per tract
    int year0 = 1;
    int T = 0;

    int n_tracts() const { return static_cast<int>(tract_ids.size()); }
    int n_cells() const { return n_tracts() * T; }
    int cell(int tract_index, int year) const { return tract_index * T + (year - year0); }
    int tract_index(const std::string& id) const;
};

ModelFrame make_frame(const ArealHierarchy& h, int year0, int year1);

// Expands estimates into working observations over the frame: 5-year tract
// records average the five years ending at t, 1-year puma records average the
// member tracts with population weights. Throws on unknown areas, years
// outside the window, or record shapes the model does not ingest.
std::vector<ModelObservation> assemble_observations(const std::vector<SurveyEstimate>& estimates,
                                                    const ArealHierarchy& h,
                                                    const ModelFrame& frame, double eps,
                                                    CountMode mode = CountMode::effective);

// baseline counts: m = raw sample size, q = [m z] capped into [0, m]
std::pair<long, long> raw_counts(const SurveyEstimate& est);

// All latent state of one iteration.
struct ModelState {
    WeightChain chain;           // eta, alpha
    Eigen::VectorXd xi;          // county effects
    Eigen::VectorXd mu;          // per-year level, flat prior
    Eigen::VectorXd eps_tilde;   // per-cell error
    double tau2 = 0.1;
    double tauC2 = 0.1;
    MaternParams matern;
    Eigen::VectorXd lp;          // cached linear predictor per cell
};

// mu_t + B_row(tract) . eta_t + xi(county) + eps_tilde; recomputed directly,
// matching the incrementally maintained cache
double linear_predictor(const ModelState& state, const Eigen::MatrixXd& B, const ModelFrame& frame,
                        int tract_index, int year);

}  // namespace disagg
