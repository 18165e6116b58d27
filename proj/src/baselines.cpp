#include "disagg/baselines.hpp"

namespace disagg {

PosteriorDraws fit_standard_binomial(const std::vector<SurveyEstimate>& estimates,
                                     const ArealHierarchy& h, const ModelFrame& frame,
                                     const KnotTree& tree, const std::vector<QuadratureSet>& quads,
                                     const Priors& priors, const McmcOptions& opt) {
    const auto obs = assemble_observations(estimates, h, frame, kDefaultClampEps, CountMode::raw);
    return run_chain(frame, obs, tree, quads, priors, opt);
}

}  // namespace disagg
