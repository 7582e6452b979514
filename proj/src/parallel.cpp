#include "facet/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace facet {

namespace {

int initial_threads() {
    if (const char* env = std::getenv("FACET_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::atomic<int>& thread_count() {
    static std::atomic<int> n{initial_threads()};
    return n;
}

} // namespace

int max_threads() { return thread_count().load(std::memory_order_relaxed); }

void set_max_threads(int n) {
    thread_count().store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

namespace detail {

bool want_parallel(std::size_t n, std::size_t grain) {
#ifdef _OPENMP
    if (max_threads() <= 1) return false;
    if (omp_in_parallel()) return false; // nested regions run serial
    return n >= 2 * (grain < 1 ? 1 : grain);
#else
    (void)n;
    (void)grain;
    return false;
#endif
}

} // namespace detail

} // namespace facet
