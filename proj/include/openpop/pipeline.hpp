#ifndef OPENPOP_PIPELINE_HPP
#define OPENPOP_PIPELINE_HPP

#include <vector>

#include "openpop/dataset.hpp"
#include "openpop/inference.hpp"
#include "openpop/modelspace.hpp"
#include "openpop/quantity.hpp"

namespace openpop {

struct FamilyFit {
    ConditionalPosterior posterior;
    double log_predictive = kNegInf;
    bool excluded_by_data = false; // zero predictive density for the data
};

struct PipelineResult {
    std::vector<FamilyFit> fits; // aligned with model families
    ModelWeights weights;
};

/// Fits every family's conditional posterior, evaluates the predictive
/// density at the observed data, and normalizes into post-data model weights.
/// Families excluded by the data get -inf predictive and zero weight; if all
/// are excluded, NoAdmissibleFamilyError propagates.
PipelineResult fit_and_weigh(const PopulationSpaceModel& model, const Dataset& data,
                             const FitSettings& settings = {}, bool parallel = true);

/// fit_and_weigh plus the quantity mixture.
MixturePosterior pipeline_mixture(const PopulationSpaceModel& model,
                                  const Dataset& data, const QuantitySpec& q,
                                  const FitSettings& settings = {},
                                  bool parallel = true);

} // namespace openpop

#endif // OPENPOP_PIPELINE_HPP
