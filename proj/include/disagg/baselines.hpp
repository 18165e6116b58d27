#pragma once

#include "disagg/mcmc.hpp"
#include "disagg/model.hpp"

namespace disagg {

// Standard Binomial disaggregation baseline: the same hierarchy and sampler
// as the proposed model, with counts taken from the raw sample sizes instead
// of the design-effect-adjusted effective counts.
PosteriorDraws fit_standard_binomial(const std::vector<SurveyEstimate>& estimates,
                                     const ArealHierarchy& h, const ModelFrame& frame,
                                     const KnotTree& tree, const std::vector<QuadratureSet>& quads,
                                     const Priors& priors, const McmcOptions& opt);

}  // namespace disagg
