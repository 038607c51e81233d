// Kernel benchmark: serial reference vs OpenMP execution of the
// data-parallel kernels, plus the Woodbury vs dense per-frequency solve.
// Every kernel pair must agree bit-for-bit (Woodbury/dense to 1e-8).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "cotrack/features.hpp"
#include "cotrack/image.hpp"
#include "cotrack/spectrum.hpp"

using namespace cotrack;
using Clock = std::chrono::steady_clock;

namespace {

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n", name,
                serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
                identical ? "bit-identical" : "MISMATCH");
}

bool same_bits(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i])
            return false;
    return true;
}

} // namespace

int main() {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int rows = 40, cols = 40, channels = 31;

    Spectrum a(rows, cols, channels), b(rows, cols, channels), rhs(rows, cols, channels);
    for (auto* s : {&a, &b, &rhs})
        for (auto& z : s->data())
            z = cplx(dist(rng), dist(rng));

    std::printf("kernel benchmark (%dx%d grid, %d channels)\n\n", rows, cols, channels);

    // per-frequency sweep, woodbury kernel
    Spectrum out_serial, out_parallel;
    const double sweep_serial = time_best_of(5, [&] {
        solve_all_bins(a, b, 2.0, 0.4, 0.5, rhs, out_serial, SolveKernel::Woodbury,
                       Exec::Serial);
    });
    const double sweep_parallel = time_best_of(5, [&] {
        solve_all_bins(a, b, 2.0, 0.4, 0.5, rhs, out_parallel, SolveKernel::Woodbury,
                       Exec::Parallel);
    });
    report("woodbury sweep", sweep_serial, sweep_parallel,
           same_bits(out_serial.data(), out_parallel.data()));

    // dense fallback kernel (same system), serial only timing vs woodbury
    Spectrum out_dense;
    const double dense_serial = time_best_of(3, [&] {
        solve_all_bins(a, b, 2.0, 0.4, 0.5, rhs, out_dense, SolveKernel::Dense, Exec::Serial);
    });
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < out_dense.data().size(); ++i) {
        num += std::norm(out_dense.data()[i] - out_serial.data()[i]);
        den += std::norm(out_dense.data()[i]);
    }
    std::printf("%-28s woodbury %6.3f ms   dense %8.3f ms   ratio %5.1fx   rel err %.2e\n",
                "woodbury vs dense kernel", sweep_serial * 1e3, dense_serial * 1e3,
                dense_serial / sweep_serial, std::sqrt(num / den));

    // forward transform batch
    Tensor grid(rows, cols, channels);
    for (auto& v : grid.data())
        v = dist(rng);
    Spectrum fwd_serial, fwd_parallel;
    const double fft_serial =
        time_best_of(5, [&] { fwd_serial = forward_spectrum(grid, Exec::Serial); });
    const double fft_parallel =
        time_best_of(5, [&] { fwd_parallel = forward_spectrum(grid, Exec::Parallel); });
    report("forward transform batch", fft_serial, fft_parallel,
           same_bits(fwd_serial.data(), fwd_parallel.data()));

    // correlation response (spectra of real grids)
    Tensor filter_grid(rows, cols, channels);
    for (auto& v : filter_grid.data())
        v = dist(rng);
    const Spectrum filter_spec = forward_spectrum(filter_grid);
    ResponseMap resp_serial, resp_parallel;
    const double corr_serial = time_best_of(5, [&] {
        resp_serial = correlation_response(fwd_serial, filter_spec, Exec::Serial);
    });
    const double corr_parallel = time_best_of(5, [&] {
        resp_parallel = correlation_response(fwd_serial, filter_spec, Exec::Parallel);
    });
    report("correlation response", corr_serial, corr_parallel,
           resp_serial.values.data() == resp_parallel.values.data());

    // hog extraction
    Image patch(160, 160, 3);
    std::uniform_int_distribution<int> px(0, 255);
    for (auto& p : patch.pixels)
        p = static_cast<std::uint8_t>(px(rng));
    FeatureGrid hog_serial, hog_parallel;
    const double hog_s = time_best_of(5, [&] { hog_serial = extract_hog(patch, 4, Exec::Serial); });
    const double hog_p =
        time_best_of(5, [&] { hog_parallel = extract_hog(patch, 4, Exec::Parallel); });
    report("hog extraction", hog_s, hog_p,
           hog_serial.values.data() == hog_parallel.values.data());

    return 0;
}
