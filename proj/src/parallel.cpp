#include "qf/parallel.hpp"

#include <algorithm>
#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qf::parallel {

namespace {
std::atomic<std::size_t> g_threads{0};  // 0 = runtime default
}

void set_threads(std::size_t n) {
    g_threads = n;
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(static_cast<int>(n));
#endif
}

std::size_t threads() {
#ifdef _OPENMP
    const std::size_t t = g_threads.load();
    return t > 0 ? t : static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
#else
    return 1;
#endif
}

bool enabled() { return threads() > 1; }

}  // namespace qf::parallel
