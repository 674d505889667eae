#include "openpop/pipeline.hpp"

#include "openpop/errors.hpp"
#include "openpop/predictive.hpp"

namespace openpop {

PipelineResult fit_and_weigh(const PopulationSpaceModel& model, const Dataset& data,
                             const FitSettings& settings, bool parallel) {
    PipelineResult result;
    result.fits.resize(model.size());
    std::vector<double> log_predictives(model.size(), kNegInf);

    for (std::size_t i = 0; i < model.size(); ++i) {
        const ModelEntry& entry = model.entry(i);
        FamilyFit& fit = result.fits[i];
        try {
            fit.posterior = fit_conditional_posterior(*entry.family, entry.prior,
                                                      data, settings);
            fit.log_predictive = log_predictive_at_observed(*entry.family,
                                                            fit.posterior, data,
                                                            parallel);
        } catch (const DegenerateFitError&) {
            fit.excluded_by_data = true;
            continue;
        } catch (const ImpossibleFamilyError&) {
            fit.excluded_by_data = true;
            continue;
        }
        log_predictives[i] = fit.log_predictive;
    }

    result.weights = weights_from_predictive(model, log_predictives);
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (result.fits[i].excluded_by_data) {
            result.weights.excluded_by_data[i] = true;
        }
    }
    return result;
}

MixturePosterior pipeline_mixture(const PopulationSpaceModel& model,
                                  const Dataset& data, const QuantitySpec& q,
                                  const FitSettings& settings, bool parallel) {
    PipelineResult res = fit_and_weigh(model, data, settings, parallel);
    std::vector<ConditionalPosterior> posteriors;
    posteriors.reserve(model.size());
    for (auto& f : res.fits) posteriors.push_back(std::move(f.posterior));
    return mixture_posterior(model, res.weights, posteriors, q);
}

} // namespace openpop
