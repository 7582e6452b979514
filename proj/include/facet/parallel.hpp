#ifndef FACET_PARALLEL_HPP
#define FACET_PARALLEL_HPP

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace facet {

// Worker count for parallel_for. Initialized from FACET_THREADS when set,
// otherwise the OpenMP default. 1 disables parallelism.
int max_threads();
void set_max_threads(int n);

namespace detail {
bool want_parallel(std::size_t n, std::size_t grain);
}

// Data-parallel map over [0, n). The body must write only to slots owned by
// its own index, so results are bit-identical for any thread count; every
// reduction in the library runs serially in index order afterwards.
template <class F>
void parallel_for(std::size_t n, F&& body, std::size_t grain = 1) {
#ifdef _OPENMP
    if (detail::want_parallel(n, grain)) {
        const int nt = max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

} // namespace facet

#endif
