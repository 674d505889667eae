#ifndef OPENPOP_MODELSPACE_HPP
#define OPENPOP_MODELSPACE_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "openpop/families.hpp"
#include "openpop/inference.hpp"

namespace openpop {

struct ModelEntry {
    FamilyPtr family;
    double prior_weight = 0.0; // prior probability of the region this family represents
    PriorSpec prior;           // conditional prior over the family's parameters
};

/// The model of the population space: an ordered set of families, their prior
/// region probabilities, and conditional parameter priors. Immutable after
/// construction.
class PopulationSpaceModel {
public:
    /// Validates: at least one family, pairwise-distinct ids, strictly
    /// positive priors summing to 1 within 1e-12, proper conditional priors
    /// matching each family's dimension. Throws ConfigError.
    explicit PopulationSpaceModel(std::vector<ModelEntry> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<ModelEntry>& entries() const noexcept { return entries_; }
    const ModelEntry& entry(std::size_t i) const { return entries_.at(i); }

    /// Index of the family with the given id, or -1.
    std::ptrdiff_t index_of(const std::string& id) const noexcept;

    std::vector<double> prior_weights() const;

private:
    std::vector<ModelEntry> entries_;
};

enum class WeightProvenance { predictive, elicited };

/// Post-data probabilities over the model's families.
struct ModelWeights {
    std::vector<double> weights; // nonnegative, sum to 1 within 1e-12
    WeightProvenance provenance = WeightProvenance::predictive;
    /// Families whose predictive density for the data was zero; they keep an
    /// exact zero weight and stay in reports with this flag.
    std::vector<bool> excluded_by_data;

    void validate() const; // throws MisuseError on invariant violation
};

/// Post-data weights from prior region probabilities and per-family log
/// predictive densities (max-shifted, so any common offset cancels). One
/// entry per family; -inf marks a family the data exclude. Throws
/// NoAdmissibleFamilyError when every entry is -inf.
ModelWeights weights_from_predictive(const PopulationSpaceModel& model,
                                     std::span<const double> log_predictives);

/// Directly asserted post-data probability ratios against one anchor family.
struct RatioElicitation {
    std::string anchor_id;
    std::map<std::string, double> ratios; // family id -> pi(P_i|y)/pi(P_anchor|y)
    std::string notes; // free-text record of the sub-region reasoning

    void validate() const; // ratios finite and > 0
};

/// Normalizes elicited ratios into weights: w_anchor = 1/(1 + sum r),
/// w_i = r_i/(1 + sum r). Requires a ratio for every non-anchor family
/// (IncompleteElicitationError) and none for the anchor or unknown families
/// (ConfigError).
ModelWeights weights_from_ratios(const PopulationSpaceModel& model,
                                 const RatioElicitation& elicitation);

/// The fallback rule for regions the data cannot separate: post-data ratios
/// equal the prior ratios.
RatioElicitation apply_prior_ratio_rule(const PopulationSpaceModel& model,
                                        const std::string& anchor_id);

} // namespace openpop

#endif // OPENPOP_MODELSPACE_HPP
