#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dirbn {

/// Number of worker threads used by parallel_for. 0 means all cores.
inline int& thread_count() {
    static int n = 0;
    return n;
}

inline void set_threads(int n) { thread_count() = n < 0 ? 0 : n; }

/**
 * Runs body(i) for i in [0, n). Iterations must be independent and must only
 * draw randomness from sub-streams keyed by i; results are then identical
 * for every thread count.
 */
template <typename Body> void parallel_for(std::size_t n, Body&& body) {
#ifdef _OPENMP
    const int threads = thread_count() > 0 ? thread_count() : omp_get_max_threads();
    if (threads > 1 && n > 1) {
        const auto count = static_cast<long long>(n);
        std::exception_ptr error;
        std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
        for (long long i = 0; i < count; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

} // namespace dirbn
