#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cotrack/solver.hpp"

namespace cotrack {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// The embedded oracle suite behind the selfcheck command: prox worked values,
// ridge degeneracy, dense-vs-spectral agreement, blockwise gradient checks,
// brute-force correlation, the mu schedule, and the Woodbury/dense sweep
// timing. All deterministic.
std::vector<CheckResult> run_selfcheck();

struct SweepBenchmark {
    double woodbury_seconds = 0.0;
    double dense_seconds = 0.0;
    double max_rel_err = 0.0; // agreement between the two kernels
};

// Times one subproblem sweep over all bins with both per-frequency kernels on
// identical random inputs (serial execution for stable numbers).
SweepBenchmark benchmark_subproblem_sweep(int rows, int cols, int channels);

// Deterministic random training instance for oracles and tests.
ProblemInstance make_random_instance(std::uint64_t seed, int rows, int cols,
                                     const std::vector<int>& channels);

} // namespace cotrack
