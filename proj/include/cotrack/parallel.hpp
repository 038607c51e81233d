#pragma once

#include <cstdint>

namespace cotrack {

// Execution policy for the data-parallel kernels. Every kernel computes each
// output element independently, so Serial and Parallel produce bit-identical
// results; Serial is kept as the reference implementation for tests and for
// the kernel benchmark.
enum class Exec {
    Serial,
    Parallel,
};

template <typename Fn>
inline void parallel_for(std::int64_t n, Exec exec, Fn&& fn) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i)
            fn(i);
    } else {
        for (std::int64_t i = 0; i < n; ++i)
            fn(i);
    }
}

} // namespace cotrack
