#ifndef OPENPOP_INFERENCE_HPP
#define OPENPOP_INFERENCE_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "openpop/dataset.hpp"
#include "openpop/families.hpp"

namespace openpop {

/// Proper prior for one parameter component. Kinds map to the named densities
/// accepted in config files; point_mass pins the component (probability one
/// at `a`, no density factor).
struct ComponentPrior {
    enum class Kind { normal, lognormal, gamma, uniform, point_mass };

    Kind kind = Kind::normal;
    double a = 0.0; // normal: mean | lognormal: meanlog | gamma: shape | uniform: lo | point: value
    double b = 1.0; // normal: sd   | lognormal: sdlog   | gamma: scale | uniform: hi | point: unused

    /// Throws ConfigError when the hyperparameters do not define a proper
    /// density (e.g. an unbounded uniform).
    void validate() const;

    double log_pdf(double x) const;
    Interval support() const;

    /// Central value used to seed mode searches.
    double central() const;

    /// Spread on the scale the grid lives on (log scale when
    /// `log_transformed`); fallback grid width for flat posteriors.
    double spread(bool log_transformed) const;
};

/// Independent per-component prior over a family's parameter vector.
struct PriorSpec {
    std::vector<ComponentPrior> components;

    void validate() const;
    double log_pdf(const ParamVector& theta) const;
};

struct FitSettings {
    int grid_nodes = 401;  // per free dimension
    double span_sd = 8.0;  // half-width of the grid in posterior-curvature sds
    std::string engine = "bayes-grid";
};

/// Checks dimension agreement and that the prior puts no mass outside the
/// family's parameter bounds (the prior must stay proper over the parameter
/// space). Throws ConfigError.
void validate_prior_for(const Family& family, const PriorSpec& prior);

/// Normalized conditional post-data distribution of a family's parameters.
struct ConditionalPosterior {
    enum class Repr { grid, weighted_samples };

    Repr repr = Repr::grid;
    std::vector<ParamVector> nodes;
    std::vector<double> masses; // nonnegative, sum to 1 within 1e-12
    double log_normalizing_constant = kNegInf; // log marginal likelihood
    std::uint64_t data_fingerprint = 0;

    /// Checks the representation invariants; throws MisuseError on violation.
    void validate(const Family& family) const;
};

class InferenceEngine {
public:
    virtual ~InferenceEngine() = default;
    virtual ConditionalPosterior fit(const Family& family, const PriorSpec& prior,
                                     const Dataset& data,
                                     const FitSettings& settings) const = 0;
    virtual std::string name() const = 0;
};

/// Registers an engine under its name; later registrations replace earlier
/// ones. "bayes-grid" is pre-registered.
void register_engine(std::shared_ptr<const InferenceEngine> engine);

/// Looks up a registered engine; throws ConfigError for unknown names.
std::shared_ptr<const InferenceEngine> find_engine(const std::string& name);

/// Fits the conditional post-data distribution of theta given the data with
/// the engine named in settings.
ConditionalPosterior fit_conditional_posterior(const Family& family,
                                               const PriorSpec& prior,
                                               const Dataset& data,
                                               const FitSettings& settings = {});

/// log integral of likelihood x prior over the parameter space, by the same
/// quadrature as the fit.
double log_marginal_likelihood(const Family& family, const PriorSpec& prior,
                               const Dataset& data,
                               const FitSettings& settings = {});

/// Data-parallel kernel: log prior + log likelihood at each node. Each index
/// writes only its own slot, so parallel and serial runs agree bit for bit;
/// `parallel = false` selects the serial reference used in tests and the
/// benchmark.
std::vector<double> log_posterior_at(const Family& family, const PriorSpec& prior,
                                     const Dataset& data,
                                     const std::vector<ParamVector>& thetas,
                                     bool parallel = true);

} // namespace openpop

#endif // OPENPOP_INFERENCE_HPP
