#ifndef OPENPOP_DATASET_HPP
#define OPENPOP_DATASET_HPP

#include <cstdint>
#include <vector>

namespace openpop {

/// An observed sample of i.i.d. univariate real values.
class Dataset {
public:
    /// Validates that the sample is nonempty and every value is finite.
    explicit Dataset(std::vector<double> values);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t n() const noexcept { return values_.size(); }

    /// Content hash used to detect posterior/data mismatches.
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

private:
    std::vector<double> values_;
    std::uint64_t fingerprint_;
};

} // namespace openpop

#endif // OPENPOP_DATASET_HPP
