#include "fft_backend.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>
#include <vector>

namespace cotrack::detail {

namespace {

// FFTW executions of cached plans are thread-safe; planning is not, not even
// against executions of other plans. Executions therefore hold the lock
// shared, planning holds it exclusively. The cache map itself has its own
// short-lived mutex.
std::shared_mutex g_exec_mutex;
std::mutex g_map_mutex;

using PlanKey = std::tuple<int, int, int>;

std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan find_plan(const PlanKey& key) {
    std::scoped_lock lock(g_map_mutex);
    auto& cache = plan_cache();
    const auto it = cache.find(key);
    return it != cache.end() ? it->second : nullptr;
}

// Plans use FFTW_ESTIMATE (deterministic algorithm choice, no runtime
// measurement) and FFTW_UNALIGNED so they can run on any caller buffer
// through the new-array interface.
fftw_plan create_plan(int rows, int cols, int sign) {
    const PlanKey key{rows, cols, sign};
    std::unique_lock exec_lock(g_exec_mutex);
    std::scoped_lock map_lock(g_map_mutex);
    auto& cache = plan_cache();
    if (const auto it = cache.find(key); it != cache.end())
        return it->second;
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    std::vector<std::complex<double>> scratch_in(n), scratch_out(n);
    fftw_plan plan = fftw_plan_dft_2d(rows, cols,
                                      reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                      reinterpret_cast<fftw_complex*>(scratch_out.data()),
                                      sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

} // namespace

void dft2d(int rows, int cols, const std::complex<double>* in, std::complex<double>* out,
           int sign) {
    fftw_plan plan = find_plan({rows, cols, sign});
    if (!plan)
        plan = create_plan(rows, cols, sign);
    std::shared_lock exec_lock(g_exec_mutex);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace cotrack::detail
