#pragma once

// Index-parallel loops. Every kernel in the library is written as
// "compute element i into slot i", then reduced in index order, so the
// serial and OpenMP paths produce bit-identical results.

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dips {

enum class Execution { serial, parallel };

inline void set_worker_count(int workers) {
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#else
    (void)workers;
#endif
}

inline int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Serial reference loop.
template <class F>
void for_each_index_serial(std::size_t n, F&& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

// OpenMP loop. The first exception thrown by any iteration is rethrown
// on the calling thread after the loop completes.
template <class F>
void for_each_index_omp(std::size_t n, F&& body) {
    std::exception_ptr failure;
    std::mutex guard;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

template <class F>
void for_each_index(Execution ex, std::size_t n, F&& body) {
    if (ex == Execution::parallel && n > 1)
        for_each_index_omp(n, body);
    else
        for_each_index_serial(n, body);
}

}  // namespace dips
