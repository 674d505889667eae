#ifndef OPENPOP_QUANTITY_HPP
#define OPENPOP_QUANTITY_HPP

#include <span>
#include <string>
#include <vector>

#include "openpop/families.hpp"
#include "openpop/inference.hpp"
#include "openpop/modelspace.hpp"

namespace openpop {

/// A population quantity: a functional of the sampling distribution.
struct QuantitySpec {
    enum class Kind { mean, variance, sd, quantile, tail_prob, expectation_of };

    Kind kind = Kind::mean;
    double param = 0.0;     // quantile: p in (0,1); tail_prob: threshold
    std::string integrand;  // expectation_of: "identity" | "square" | "abs"

    /// Parses the CLI syntax: mean | variance | sd | quantile:<p> |
    /// tailprob:<t> | expect:<integrand>. Throws ConfigError.
    static QuantitySpec parse(const std::string& text);

    std::string str() const;
};

/// Value of the quantity under the sampling distribution at theta. Closed
/// forms where available, otherwise adaptive quadrature of the integrand
/// against the density. Throws UndefinedQuantityError for nonexistent
/// moments.
double quantity_value(const Family& family, const ParamVector& theta,
                      const QuantitySpec& q);

/// Discrete weighted law over quantity values, sorted ascending. This is the
/// exact representation tests bind to; smoothing is for plots only.
class QuantityLaw {
public:
    QuantityLaw() = default;

    /// Sorts by value (stable in the original index order for ties) and
    /// keeps masses aligned. Masses must be nonnegative.
    QuantityLaw(std::vector<double> values, std::vector<double> masses);

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& masses() const noexcept { return masses_; }
    std::size_t size() const noexcept { return values_.size(); }
    double total_mass() const;

    double mean() const;

    /// Right-continuous CDF: P(Q <= q).
    double cdf(double q) const;

    /// Left-continuous generalized inverse of the CDF; when p lands exactly
    /// on an atom's cumulative mass, ties break toward the midpoint of that
    /// atom and the next.
    double quantile(double p) const;

private:
    std::vector<double> values_;
    std::vector<double> masses_;
    std::vector<double> cum_; // cumulative masses
};

/// Pushforward of the parameter posterior through the quantity functional.
QuantityLaw family_quantity_posterior(const Family& family,
                                      const ConditionalPosterior& posterior,
                                      const QuantitySpec& q);

/// Gaussian-kernel density of the law (Silverman bandwidth over the weighted
/// atoms) evaluated on an explicit grid. Plotting/overlap surface only; the
/// exact law is the atoms themselves.
std::vector<double> smoothed_density(const QuantityLaw& law,
                                     std::span<const double> grid);

/// The Silverman bandwidth used by smoothed_density.
double silverman_bandwidth(const QuantityLaw& law);

/// Plot-ready smoothed density (Gaussian kernel, Silverman bandwidth over the
/// weighted atoms) with the exact CDF alongside.
struct DensityTable {
    std::vector<double> q;
    std::vector<double> density;
    std::vector<double> cdf;
};

struct CredibleInterval {
    double lo;
    double hi;
};

/// The combined post-data law of a quantity: per-family pushforwards mixed by
/// the post-data model weights. Immutable after assembly.
class MixturePosterior {
public:
    MixturePosterior(std::vector<double> weights,
                     std::vector<QuantityLaw> per_family, QuantitySpec q);

    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<QuantityLaw>& per_family() const noexcept { return per_family_; }
    const QuantityLaw& combined() const noexcept { return combined_; }
    const QuantitySpec& quantity() const noexcept { return quantity_; }

    double mean() const { return combined_.mean(); }

    /// Equal-tailed interval at the given level.
    CredibleInterval interval(double level) const;

    DensityTable density_table(std::size_t grid_points = 512) const;

private:
    std::vector<double> weights_;
    std::vector<QuantityLaw> per_family_;
    QuantityLaw combined_;
    QuantitySpec quantity_;
};

/// Assembles the overall post-data law of the quantity from the model, its
/// post-data weights, and the fitted per-family posteriors. A family with
/// positive weight but undefined quantity raises UndefinedQuantityError
/// naming the family; zero-weight families are skipped.
MixturePosterior mixture_posterior(const PopulationSpaceModel& model,
                                   const ModelWeights& weights,
                                   const std::vector<ConditionalPosterior>& posteriors,
                                   const QuantitySpec& q);

struct QuantitySummary {
    double mean;
    CredibleInterval interval;
    double level;
    DensityTable table;
};

QuantitySummary summarize(const MixturePosterior& mp, double level,
                          std::size_t table_points = 512);

} // namespace openpop

#endif // OPENPOP_QUANTITY_HPP
