#include "aoipomdp/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace aoipomdp {

int worker_count() {
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("AOI_POMDP_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0 && cap < n) n = cap;
        } catch (...) {
            // unparsable value: ignore the cap
        }
    }
    return n;
}

}  // namespace aoipomdp
