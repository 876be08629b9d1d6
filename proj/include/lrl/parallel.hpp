#pragma once

#include <cstddef>
#include <exception>

#ifdef LRL_HAVE_OPENMP
#include <omp.h>
#endif

namespace lrl {

// Execution policy for the data-parallel kernels. Every kernel has a plain
// serial loop as the reference path; the OpenMP path distributes items only,
// so per-item arithmetic is identical and reductions stay deterministic.
enum class Exec { Serial, OpenMP };

inline int max_threads() {
#ifdef LRL_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef LRL_HAVE_OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

template <class F>
void for_each_index(std::size_t n, Exec policy, F&& f) {
    if (policy == Exec::OpenMP) {
#ifdef LRL_HAVE_OPENMP
        std::exception_ptr first = nullptr;
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                f(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical
                if (!first) first = std::current_exception();
            }
        }
        if (first) std::rethrow_exception(first);
        return;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace lrl
