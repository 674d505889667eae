#include "openpop/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace openpop {

double log_sum_exp(std::span<const double> x) {
    double m = kNegInf;
    for (double v : x) {
        if (v > m) m = v;
    }
    if (!std::isfinite(m)) return m; // all -inf (or empty)
    double s = 0.0;
    for (double v : x) {
        s += std::exp(v - m);
    }
    return m + std::log(s);
}

double compensated_sum(std::span<const double> x) {
    double s = 0.0;
    double c = 0.0;
    for (double v : x) {
        const double t = s + v;
        if (std::abs(s) >= std::abs(v)) {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    return s + c;
}

double compensated_dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    double c = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double v = a[i] * b[i];
        const double t = s + v;
        if (std::abs(s) >= std::abs(v)) {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    return s + c;
}

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

double golden_section_min(const std::function<double(double)>& f, double lo,
                          double hi, double tol, int max_iter) {
    if (!(lo <= hi)) throw std::invalid_argument("golden_section_min: bad bracket");
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol, int max_iter) {
    double fl = f(lo);
    double fh = f(hi);
    if (fl == 0.0) return lo;
    if (fh == 0.0) return hi;
    if ((fl > 0.0) == (fh > 0.0)) {
        throw std::invalid_argument("bisect_root: endpoints do not bracket a root");
    }
    double a = lo, b = hi;
    for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fl > 0.0)) {
            a = m;
            fl = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

WeightedMoments weighted_moments(std::span<const double> values,
                                 std::span<const double> weights) {
    const double total = compensated_sum(weights);
    if (!(total > 0.0)) return {};
    const double mean = compensated_dot(values, weights) / total;
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mean;
        const double v = weights[i] * d * d;
        const double t = s + v;
        c += (std::abs(s) >= std::abs(v)) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    return {mean, (s + c) / total};
}

} // namespace openpop
