#ifndef OPENPOP_SIMULATE_HPP
#define OPENPOP_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "openpop/dataset.hpp"
#include "openpop/families.hpp"
#include "openpop/modelspace.hpp"
#include "openpop/quantity.hpp"

namespace openpop {

/// A "true" data-generating distribution, typically chosen outside the model
/// on purpose: a shipped family at fixed parameters, a two-component normal
/// mixture, or a contaminated family.
struct TrueDistSpec {
    enum class Kind { family, normal_mixture, contaminated };

    Kind kind = Kind::family;

    // kind == family
    FamilyPtr family;
    ParamVector theta;

    // kind == normal_mixture
    std::vector<double> mix_weights; // positive, sum to 1
    std::vector<double> mix_means;
    std::vector<double> mix_sds;

    // kind == contaminated
    FamilyPtr base;
    ParamVector base_theta;
    double fraction = 0.0; // contamination fraction in [0, 1)
    FamilyPtr contaminant;
    ParamVector contaminant_theta;

    void validate() const; // throws ConfigError

    Dataset sample(std::size_t n, std::uint64_t seed) const;

    /// Ground truth for the quantity: closed form for families and normal
    /// mixtures (mixture quantiles by bisection on the exact CDF);
    /// contaminated truths fall back to a 10^7-draw Monte Carlo oracle.
    double true_quantity(const QuantitySpec& q) const;

    /// Whether true_quantity(q) uses the Monte Carlo oracle.
    bool quantity_by_monte_carlo(const QuantitySpec& q) const;
};

struct CoverageRow {
    std::size_t rep = 0;
    bool degenerate = false; // pipeline raised degenerate-fit / no-admissible-family
    bool covered = false;    // mixture interval covers the true quantity
    double interval_lo = 0.0;
    double interval_hi = 0.0;
    std::vector<double> weights;
    std::vector<bool> single_covered; // per-family single-model intervals
};

struct CoverageTable {
    double true_value = 0.0;
    bool true_value_by_mc = false;
    double level = 0.9;
    std::size_t n = 0;
    std::size_t reps = 0;
    std::size_t degenerate_count = 0;
    std::vector<CoverageRow> rows; // ordered by rep index
    double mixture_coverage = 0.0; // over non-degenerate reps
    double mixture_se = 0.0;       // binomial standard error
    std::vector<double> single_coverage;
    std::vector<double> single_se;
    std::vector<double> mean_weights;
};

/// Draws `reps` datasets of size n from the truth, runs the full pipeline on
/// each, and tabulates how often the level-interval covers the true quantity,
/// for the mixture and for each single family. Per-rep sub-seeds derive from
/// (seed, rep), so parallel and serial runs produce identical tables.
CoverageTable run_coverage_experiment(const PopulationSpaceModel& model,
                                      const QuantitySpec& q,
                                      const TrueDistSpec& truth, std::size_t n,
                                      std::size_t reps, double level,
                                      std::uint64_t seed,
                                      const FitSettings& settings = {},
                                      bool parallel = true);

struct WeightConcentrationRow {
    std::size_t n = 0;
    std::vector<double> mean_weights;
    std::size_t degenerate_count = 0;
};

/// Mean post-data weights as the sample size grows; a sanity check that the
/// weight of the data-generating family concentrates.
std::vector<WeightConcentrationRow> weight_concentration_experiment(
    const PopulationSpaceModel& model, const TrueDistSpec& truth,
    std::span<const std::size_t> n_schedule, std::size_t reps,
    std::uint64_t seed, const FitSettings& settings = {}, bool parallel = true);

} // namespace openpop

#endif // OPENPOP_SIMULATE_HPP
