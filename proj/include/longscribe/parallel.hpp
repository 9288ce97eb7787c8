#pragma once

#include <cstddef>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace longscribe {

// jobs semantics used across the toolkit: 0 = all logical cores,
// 1 = serial reference path, k > 1 = k OpenMP threads.
inline int effective_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs <= 0) return omp_get_max_threads();
    return jobs;
#else
    (void)jobs;
    return 1;
#endif
}

// Runs body(i) for i in [0, n). Iterations must write to disjoint slots;
// results are then independent of the schedule, so jobs only changes the
// wall clock, never the output.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
    const int threads = effective_jobs(jobs);
    if (threads > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#else
    (void)jobs;
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace longscribe
