#ifndef OPENPOP_TESTS_HELPERS_HPP
#define OPENPOP_TESTS_HELPERS_HPP

#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "openpop/dataset.hpp"
#include "openpop/families.hpp"
#include "openpop/inference.hpp"

namespace openpop::test {

inline ComponentPrior cp_normal(double mean, double sd) {
    return {ComponentPrior::Kind::normal, mean, sd};
}
inline ComponentPrior cp_lognormal(double meanlog, double sdlog) {
    return {ComponentPrior::Kind::lognormal, meanlog, sdlog};
}
inline ComponentPrior cp_gamma(double shape, double scale) {
    return {ComponentPrior::Kind::gamma, shape, scale};
}
inline ComponentPrior cp_uniform(double lo, double hi) {
    return {ComponentPrior::Kind::uniform, lo, hi};
}
inline ComponentPrior cp_point(double value) {
    return {ComponentPrior::Kind::point_mass, value};
}

inline PriorSpec make_prior(std::vector<ComponentPrior> comps) {
    PriorSpec p;
    p.components = std::move(comps);
    return p;
}

/// Conjugate closed forms for the known-sigma normal model with a normal
/// prior on mu: the oracle the grid engine is checked against.
struct ConjugateOracle {
    double post_mean;
    double post_var;
    double log_marginal;

    ConjugateOracle(const Dataset& data, double prior_mean, double prior_sd) {
        const double n = static_cast<double>(data.n());
        const double tau2 = prior_sd * prior_sd;
        double sum = 0.0, sum_sq = 0.0;
        for (double y : data.values()) {
            sum += y;
            sum_sq += y * y;
        }
        const double lambda = n + 1.0 / tau2;
        post_mean = (sum + prior_mean / tau2) / lambda;
        post_var = 1.0 / lambda;
        // log integral of N(y | mu, 1) dN(mu | m0, tau2)
        const double log_two_pi = 1.8378770664093454836;
        const double m0 = prior_mean;
        const double quad = sum_sq + m0 * m0 / tau2 - lambda * post_mean * post_mean;
        log_marginal = -0.5 * n * log_two_pi - 0.5 * std::log(tau2) -
                       0.5 * std::log(lambda) - 0.5 * quad;
    }

    double density(double mu) const {
        const double z = (mu - post_mean) / std::sqrt(post_var);
        return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846 * post_var);
    }
    double cdf(double mu) const {
        return 0.5 * std::erfc(-(mu - post_mean) / std::sqrt(2.0 * post_var));
    }
    double quantile(double p) const {
        const boost::math::normal_distribution<double> d(post_mean, std::sqrt(post_var));
        return boost::math::quantile(d, p);
    }
};

} // namespace openpop::test

#endif // OPENPOP_TESTS_HELPERS_HPP
