#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace disagg {

// Retained posterior draws: annual tract-level proportions for every
// (tract, year) cell plus the scalar parameters, with provenance.
struct PosteriorDraws {
    std::vector<std::string> tract_ids;  // column-group order of pi
    int year0 = 1;                       // first modelled year
    int T = 0;

    // n_draws x (n_tracts * T); cell column = tract_index * T + (year - year0)
    Eigen::MatrixXd pi;
    // n_draws x scalar parameters (mu_1..mu_T, tau2, tauC2, sigma2, phi, nu, alpha)
    Eigen::MatrixXd scalars;
    std::vector<std::string> scalar_names;

    std::uint64_t seed = 0;
    std::uint64_t config_fingerprint = 0;

    // acceptance-rate log of the Metropolis steps
    struct AccLogEntry {
        std::string param;
        bool burnin = false;
        long batch = 0;
        double rate = 0.0;
        double scale = 0.0;
    };
    std::vector<AccLogEntry> acc_log;

    int n_draws() const { return static_cast<int>(pi.rows()); }
    int n_tracts() const { return static_cast<int>(tract_ids.size()); }

    int tract_index(const std::string& tract_id) const;
    int cell_col(const std::string& tract_id, int year) const;
    bool has_cell(const std::string& tract_id, int year) const;

    std::vector<double> pi_draws(const std::string& tract_id, int year) const;
    std::vector<double> scalar_draws(const std::string& name) const;

    // merge retained draws of another chain (same layout required)
    void append(const PosteriorDraws& other);
};

void save_draws(const std::string& path, const PosteriorDraws& d);
PosteriorDraws load_draws(const std::string& path);

// summary CSV: param,mean,sd,q025,q25,q50,q75,q975,ess,geweke_z for every
// scalar parameter, with a fingerprint comment header
void write_summary_csv(const std::string& path, const PosteriorDraws& d);

void write_acceptance_log_csv(const std::string& path, const PosteriorDraws& d);

}  // namespace disagg
