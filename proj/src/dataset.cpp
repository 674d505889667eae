#include "openpop/dataset.hpp"

#include <cmath>

#include "openpop/errors.hpp"
#include "openpop/numerics.hpp"

namespace openpop {

Dataset::Dataset(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw Error("Dataset: sample must contain at least one value");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw Error("Dataset: every value must be finite");
        }
    }
    const std::uint64_t n = values_.size();
    fingerprint_ = fnv1a(values_.data(), values_.size() * sizeof(double),
                         fnv1a(&n, sizeof(n)));
}

} // namespace openpop
