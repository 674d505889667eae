#include "openpop/predictive.hpp"

#include <cmath>
#include <vector>

#include "openpop/errors.hpp"
#include "openpop/parallel.hpp"

namespace openpop {

double log_predictive_at_observed(const Family& family,
                                  const ConditionalPosterior& posterior,
                                  const Dataset& data, bool parallel) {
    if (posterior.data_fingerprint != data.fingerprint()) {
        throw MisuseError(family.id() +
                          ": posterior was fitted to a different dataset");
    }
    if (posterior.nodes.empty()) {
        throw MisuseError(family.id() + ": empty posterior");
    }

    const auto loglik = family.make_log_likelihood(data);
    const std::size_t m = posterior.nodes.size();
    std::vector<double> terms(m);
    auto body = [&](std::size_t k) {
        const double w = posterior.masses[k];
        if (w <= 0.0) {
            terms[k] = kNegInf;
            return;
        }
        const double ll = (*loglik)(posterior.nodes[k]);
        terms[k] = ll == kNegInf ? kNegInf : std::log(w) + ll;
    };
    if (parallel) {
        parallel_for(static_cast<std::ptrdiff_t>(m), body);
    } else {
        serial_for(static_cast<std::ptrdiff_t>(m), body);
    }

    const double result = log_sum_exp(terms);
    if (result == kNegInf) {
        throw ImpossibleFamilyError(
            family.id() + ": zero predictive density for the observed data at "
                          "every posterior node");
    }
    return result;
}

} // namespace openpop
