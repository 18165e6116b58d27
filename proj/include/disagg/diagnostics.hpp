#pragma once

#include <vector>

namespace disagg {

// Geweke convergence z-score comparing the first frac_a of the chain with
// the last frac_b, with spectral-density-at-zero variance estimates.
// Throws on chains shorter than 100 or with degenerate segments.
double geweke_z(const std::vector<double>& chain, double frac_a = 0.1, double frac_b = 0.5);

// Effective sample size via the initial monotone sequence estimator on the
// autocorrelation function. Returns 0 for constant chains.
double chain_ess(const std::vector<double>& chain);

}  // namespace disagg
