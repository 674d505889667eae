#ifndef OPENPOP_ERRORS_HPP
#define OPENPOP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace openpop {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter vector lies outside its family's declared bounds.
class ParameterDomainError : public Error {
    using Error::Error;
};

/// Requested (mean, variance) pair is unattainable for the family.
class MomentDomainError : public Error {
    using Error::Error;
};

/// Posterior fit collapsed: every grid node has zero posterior mass.
class DegenerateFitError : public Error {
    using Error::Error;
};

/// A family gives zero predictive density to the observed data at every
/// posterior node; it contributes zero weight to the model mixture.
class ImpossibleFamilyError : public Error {
    using Error::Error;
};

/// API misuse, e.g. evaluating a posterior against data it was not fitted to.
class MisuseError : public Error {
    using Error::Error;
};

/// Ratio elicitation lacks a ratio for some non-anchor family.
class IncompleteElicitationError : public Error {
    using Error::Error;
};

/// Every family in the model has zero predictive density for the data.
class NoAdmissibleFamilyError : public Error {
    using Error::Error;
};

/// Requested population quantity does not exist for the family (e.g. the
/// variance of a heavy-tailed location-scale family with too few dof).
class UndefinedQuantityError : public Error {
    using Error::Error;
};

/// Null statistic distribution lacks the moments the test statistic needs.
class UndefinedStatisticError : public Error {
    using Error::Error;
};

/// Weight function for a weighted P value has zero total mass.
class DegenerateWeightError : public Error {
    using Error::Error;
};

/// Family pair cannot be compared (no common (mean, variance) parametrization).
class UnsupportedComparisonError : public Error {
    using Error::Error;
};

/// Malformed or inconsistent configuration input.
class ConfigError : public Error {
    using Error::Error;
};

} // namespace openpop

#endif // OPENPOP_ERRORS_HPP
