#ifndef OPENPOP_PARALLEL_HPP
#define OPENPOP_PARALLEL_HPP

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace openpop {

/// Worker count for parallel kernels. OPENPOP_THREADS caps it when set to a
/// positive integer; otherwise the OpenMP default applies. Re-read on every
/// call so tests can toggle it.
int thread_cap();

/// Runs f(i) for i in [0, n). Each index writes only its own output slot, so
/// the result is bit-identical for any thread count. Reductions stay with the
/// caller, in fixed serial order.
template <class F>
void parallel_for(std::ptrdiff_t n, F&& f) {
#ifdef _OPENMP
    const int threads = thread_cap();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        f(static_cast<std::size_t>(i));
    }
#else
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        f(static_cast<std::size_t>(i));
    }
#endif
}

/// Serial reference twin of parallel_for, kept for equivalence tests and the
/// kernel benchmark.
template <class F>
void serial_for(std::ptrdiff_t n, F&& f) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        f(static_cast<std::size_t>(i));
    }
}

} // namespace openpop

#endif // OPENPOP_PARALLEL_HPP
