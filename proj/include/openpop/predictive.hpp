#ifndef OPENPOP_PREDICTIVE_HPP
#define OPENPOP_PREDICTIVE_HPP

#include "openpop/dataset.hpp"
#include "openpop/families.hpp"
#include "openpop/inference.hpp"

namespace openpop {

/// Log post-data predictive density of a replicate dataset of the same size,
/// evaluated at the observed data itself: log of the posterior-weighted
/// average of the data likelihood over the parameter nodes.
///
/// The posterior must have been fitted to `data` (checked via the recorded
/// fingerprint; mismatch throws MisuseError). Throws ImpossibleFamilyError
/// when every node gives the data zero likelihood; such a family carries zero
/// weight in the model mixture.
///
/// Note this quantity uses the data twice by construction; it is not the
/// marginal likelihood.
double log_predictive_at_observed(const Family& family,
                                  const ConditionalPosterior& posterior,
                                  const Dataset& data, bool parallel = true);

} // namespace openpop

#endif // OPENPOP_PREDICTIVE_HPP
