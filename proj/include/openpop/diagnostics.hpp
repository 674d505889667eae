#ifndef OPENPOP_DIAGNOSTICS_HPP
#define OPENPOP_DIAGNOSTICS_HPP

#include <span>
#include <string>
#include <vector>

#include "openpop/dataset.hpp"
#include "openpop/families.hpp"
#include "openpop/inference.hpp"
#include "openpop/modelspace.hpp"
#include "openpop/quantity.hpp"

namespace openpop {

enum class TestStatistic { obs_value, sample_mean };

std::string to_string(TestStatistic s);
TestStatistic parse_statistic(const std::string& text); // throws ConfigError

/// Two-sided P value for the point null theta0: p = 2 min(F0(t), 1 - F0(t)).
/// obs_value uses the single observation as the statistic (n must be 1);
/// sample_mean uses the normal approximation with the family's moments at
/// theta0. Throws UndefinedStatisticError when the null moments do not exist.
double pointwise_pvalue(const Family& family, const ParamVector& theta0,
                        const Dataset& data, TestStatistic statistic);

/// Weighted average of pointwise P values with its per-node table.
struct PValueReport {
    double lambda = 0.0;
    std::vector<ParamVector> nodes;
    std::vector<double> alphas;  // pointwise P value at each node
    std::vector<double> weights; // plausibility weight at each node
    TestStatistic statistic = TestStatistic::sample_mean;

    /// Recomputes lambda from the table; throws MisuseError when it disagrees
    /// beyond 1e-12.
    void validate() const;
};

/// lambda = sum(alpha * w) / sum(w) over explicit nodes and weights. Weights
/// must be nonnegative with positive total (DegenerateWeightError).
PValueReport weighted_pvalue(const Family& family,
                             const std::vector<ParamVector>& nodes,
                             std::span<const double> weights,
                             const Dataset& data, TestStatistic statistic);

/// Same, with the fitted posterior supplying nodes and weights (the
/// posterior-predictive P value when the posterior is Bayesian).
PValueReport weighted_pvalue(const Family& family,
                             const ConditionalPosterior& posterior,
                             const Dataset& data, TestStatistic statistic);

/// Demonstration record for the flat-likelihood case: a single observation
/// from a uniform location family, tested against the point null theta = 0.
struct UniformDemoRecord {
    double half_width = 1.0;
    double y = 0.0;
    double prior_null_prob = 0.5;
    bool support_excluded = false; // y outside the null support; p = 0
    double p_two_sided = 0.0;
    double null_density_at_y = 0.0;
    double max_density_height = 0.0;
    bool density_at_max_height = false;
    std::vector<double> theta_grid;
    std::vector<double> likelihood_ratio; // L(theta; y) / max_theta' L; <= 1 by flatness
    double max_likelihood_ratio = 0.0;
};

UniformDemoRecord uniform_demo(double half_width, double y,
                               double prior_null_prob,
                               int theta_grid_points = 81,
                               double theta_span = 2.0);

/// Family-substitution sensitivity check: fit the quantity posterior under
/// family i and under a stand-in family i* at matched (mean, variance), and
/// measure how far apart the two laws are.
struct SensitivityReport {
    std::string family_i;
    std::string family_istar;
    QuantitySpec quantity;
    double ks_distance = 0.0;         // between the two quantity-posterior CDFs
    double overlap_coefficient = 0.0; // of the smoothed quantity densities
    double joint_sup_abs = 0.0;       // sup |pi_i - pi_i*| over a shared (mean, variance) grid
    double joint_sup_rel = 0.0;       // relative to the taller posterior peak
    double threshold = 0.1;
    bool enlarge_model = false;       // verdict: quantity posterior is family-sensitive
    std::string suggested_config;     // stanza adding family i* to the model
};

/// KS distance between two discrete laws: sup over merged atoms of the CDF gap.
double ks_distance(const QuantityLaw& a, const QuantityLaw& b);

/// Overlap coefficient (integral of the pointwise minimum) of the two laws'
/// smoothed densities on a shared grid.
double overlap_coefficient(const QuantityLaw& a, const QuantityLaw& b,
                           std::size_t grid_points = 512);

/// Both families are refitted in the (mean, variance) parametrization under
/// the same `moment_prior` (components: mean, variance). Families without
/// that parametrization raise UnsupportedComparisonError.
SensitivityReport sensitivity_compare(const PopulationSpaceModel& model,
                                      const std::string& family_i,
                                      const std::string& family_istar,
                                      const QuantitySpec& q, const Dataset& data,
                                      const PriorSpec& moment_prior,
                                      double threshold,
                                      const FitSettings& settings = {});

} // namespace openpop

#endif // OPENPOP_DIAGNOSTICS_HPP
