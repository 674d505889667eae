#include "openpop/parallel.hpp"

#include <cstdlib>
#include <string>

namespace openpop {

int thread_cap() {
#ifdef _OPENMP
    int cap = omp_get_max_threads();
#else
    int cap = 1;
#endif
    if (const char* env = std::getenv("OPENPOP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            cap = static_cast<int>(v);
        }
    }
    return cap < 1 ? 1 : cap;
}

} // namespace openpop
