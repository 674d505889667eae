#ifndef OPENPOP_NUMERICS_HPP
#define OPENPOP_NUMERICS_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace openpop {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// log(sum(exp(x))) with max shift; -inf inputs contribute nothing.
/// Summation order is the element order (fixed, serial) so results are
/// reproducible bit for bit.
double log_sum_exp(std::span<const double> x);

/// Neumaier-compensated sum; error stays O(eps) independent of length.
double compensated_sum(std::span<const double> x);

/// Weighted compensated dot product sum(a[i] * b[i]).
double compensated_dot(std::span<const double> a, std::span<const double> b);

/// Maps raw 64-bit generator output to a uniform draw strictly inside (0,1):
/// multiples of 2^-53 in [2^-53, 1 - 2^-53].
inline double canonical_u01(std::uint64_t bits) {
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
}

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

/// Deterministic per-task sub-seed: identical (seed, index) pairs give the
/// same stream whether tasks run serially or in parallel.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// FNV-1a over arbitrary bytes.
std::uint64_t fnv1a(const void* data, std::size_t size,
                    std::uint64_t seed = 0xCBF29CE484222325ULL);

/// Minimizes a unimodal 1-D function by golden-section search.
/// Returns argmin; tolerance is on the abscissa.
double golden_section_min(const std::function<double(double)>& f, double lo,
                          double hi, double tol = 1e-10, int max_iter = 200);

/// Finds a root of f in [lo, hi] by bisection; f(lo) and f(hi) must bracket.
double bisect_root(const std::function<double(double)>& f, double lo,
                   double hi, double tol = 1e-12, int max_iter = 200);

struct WeightedMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean/variance of a normalized discrete law (weights need not sum to 1).
WeightedMoments weighted_moments(std::span<const double> values,
                                 std::span<const double> weights);

} // namespace openpop

#endif // OPENPOP_NUMERICS_HPP
