#ifndef OPENPOP_FAMILIES_HPP
#define OPENPOP_FAMILIES_HPP

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openpop/dataset.hpp"
#include "openpop/numerics.hpp"

namespace openpop {

/// One-dimensional parameter bound; infinite endpoints are always open.
struct Bound {
    double lo = kNegInf;
    double hi = kPosInf;
    bool lo_open = true;
    bool hi_open = true;

    bool contains(double x) const noexcept {
        const bool above = lo_open ? x > lo : x >= lo;
        const bool below = hi_open ? x < hi : x <= hi;
        return above && below;
    }
    static Bound positive() { return {0.0, kPosInf, true, true}; }
    static Bound real_line() { return {}; }
};

/// Declared name and bound of one parameter component.
struct ComponentSpec {
    std::string name;
    Bound bound;
};

/// Ordered parameter values; names and bounds are declared once on the family.
struct ParamVector {
    std::vector<double> values;

    ParamVector() = default;
    explicit ParamVector(std::vector<double> v) : values(std::move(v)) {}
    ParamVector(std::initializer_list<double> v) : values(v) {}

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    double& operator[](std::size_t i) noexcept { return values[i]; }
};

struct Moments {
    double mean;
    double variance;
};

/// Closed support interval of a sampling distribution; endpoints may be infinite.
struct Interval {
    double lo;
    double hi;
};

/// Attainable (mean, variance) set of a family exposing that parametrization.
struct MomentDomain {
    Bound mean;
    Bound variance = Bound::positive();
};

/// Per-dataset log-likelihood evaluator. Families with sufficient statistics
/// override the factory so grid sweeps cost O(1) per node instead of O(n).
/// Evaluators are immutable and safe for concurrent use.
class LogLikelihood {
public:
    virtual ~LogLikelihood() = default;
    virtual double operator()(const ParamVector& theta) const = 0;
};

/// A parametric family of univariate sampling distributions. Instances are
/// immutable after construction; every operation is pure.
class Family {
public:
    virtual ~Family() = default;

    const std::string& id() const noexcept { return id_; }
    const std::string& display_name() const noexcept { return display_name_; }

    /// Free-text description of the population-space region this family
    /// stands for. Documentation only; no computation depends on it.
    const std::string& region_label() const noexcept { return region_label_; }

    const std::vector<ComponentSpec>& components() const noexcept { return components_; }
    std::size_t dim() const noexcept { return components_.size(); }

    /// Index of a named component, or -1.
    std::ptrdiff_t component_index(std::string_view name) const noexcept;

    bool in_bounds(const ParamVector& theta) const noexcept;

    /// Throws ParameterDomainError when theta violates the declared bounds.
    void require_in_bounds(const ParamVector& theta) const;

    /// Log density at a point; -inf outside the support, never an error for
    /// finite points. Out-of-bounds theta throws.
    virtual double log_density(const ParamVector& theta, double point) const = 0;

    virtual double cdf(const ParamVector& theta, double point) const = 0;

    /// Generalized inverse of cdf; p must lie strictly inside (0, 1).
    virtual double quantile(const ParamVector& theta, double p) const = 0;

    virtual Interval support(const ParamVector& theta) const = 0;

    /// Mean and variance as functions of theta. Throws UndefinedQuantityError
    /// when the family lacks the moment.
    virtual Moments params_to_moments(const ParamVector& theta) const = 0;

    /// Whether the family is fully specified by (mean, variance).
    virtual bool has_moment_parametrization() const noexcept { return false; }

    virtual MomentDomain moment_domain() const;

    /// Inverse of params_to_moments where it exists; throws MomentDomainError
    /// for unattainable pairs.
    virtual ParamVector moments_to_params(double mean, double variance) const;

    /// Deterministic sample: identical (theta, n, seed) reproduce bit-identical
    /// values. Default draws by inverse CDF from a seeded mt19937_64.
    virtual Dataset sample(const ParamVector& theta, std::size_t n,
                           std::uint64_t seed) const;

    virtual std::unique_ptr<LogLikelihood> make_log_likelihood(const Dataset& data) const;

protected:
    Family(std::string id, std::string display_name,
           std::vector<ComponentSpec> components, std::string region_label);

private:
    std::string id_;
    std::string display_name_;
    std::vector<ComponentSpec> components_;
    std::string region_label_;
};

using FamilyPtr = std::shared_ptr<const Family>;

// Shipped families.
FamilyPtr make_normal_family(std::string region_label = "symmetric, light-tailed");
FamilyPtr make_lognormal_family(std::string region_label = "right-skewed, heavy-tailed");
FamilyPtr make_gamma_family(std::string region_label = "right-skewed, light-to-moderate tails");
FamilyPtr make_uniform_location_family(double half_width,
                                       std::string region_label = "flat, bounded support");
FamilyPtr make_student_t_family(double nu,
                                std::string region_label = "symmetric, heavy-tailed");

/// Constructs a shipped family by config id ("normal", "lognormal", "gamma",
/// "uniform_loc", "student_t"). `known` carries instance constants
/// (uniform_loc: "a"; student_t: "nu"). Throws ConfigError for unknown ids or
/// missing/invalid constants.
FamilyPtr make_family(const std::string& id,
                      const std::map<std::string, double>& known = {},
                      std::string region_label = "");

/// View of `base` with some components pinned to constants (for example a
/// normal family with known sigma). The pinned components disappear from the
/// parameter vector.
FamilyPtr fix_components(FamilyPtr base,
                         const std::vector<std::pair<std::string, double>>& pinned);

/// Reparametrizes `base` by (mean, variance). Requires
/// base->has_moment_parametrization(); throws UnsupportedComparisonError
/// otherwise. Used for cross-family comparisons at matched moments.
FamilyPtr moment_parametrized(FamilyPtr base);

/// Same family under a new instance id (for models holding two differently
/// configured instances of one family).
FamilyPtr rename_family(FamilyPtr base, std::string id);

} // namespace openpop

#endif // OPENPOP_FAMILIES_HPP
