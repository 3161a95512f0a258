#pragma once

#include <cstddef>

namespace qf::parallel {

/// Upper bound on OpenMP threads for library kernels. 1 forces the serial path.
void set_threads(std::size_t n);
std::size_t threads();

/// True when more than one thread is allowed; used in `#pragma omp ... if(...)` clauses.
bool enabled();

}  // namespace qf::parallel
