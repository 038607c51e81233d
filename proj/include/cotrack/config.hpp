#pragma once

#include <string>
#include <vector>

#include "cotrack/parallel.hpp"

namespace cotrack {

enum class FeatureKind { Hog, Cn, Lbp };

const char* feature_name(FeatureKind k);

// Proximal step applied to the stacked filter: radial shrinkage of the whole
// vector, or the coordinate-wise soft threshold (the exact prox of the L1
// norm). Both are implemented; block shrinkage is the default.
enum class ProxMode { BlockShrinkage, ElementwiseSoftThreshold };

// Order of the per-feature subproblem sweep: Gauss-Seidel uses the freshest
// neighbour filters inside one iteration, Jacobi evaluates every right-hand
// side at the previous iterate.
enum class SweepMode { GaussSeidel, Jacobi };

// Per-frequency linear solve backend. Woodbury exploits the rank-2 structure
// of the normal equations; Dense builds the C x C system explicitly and is
// kept as a verification fallback.
enum class SolveKernel { Woodbury, Dense };

struct SolverConfig {
    double lambda0 = 0.01;      // L1 weight on the stacked filter
    double lambda_pair = 0.1;   // uniform agreement weight between feature pairs
    // Optional row-major N x N override of the pairwise weights. Must be
    // symmetric with zero diagonal; empty means uniform lambda_pair.
    std::vector<double> lambda_pair_matrix;
    double ridge_lambda = 1e-4; // regularizer of the closed-form ridge oracle
    double mu0 = 0.1;           // initial consensus penalty
    double rho = 1.5;           // penalty growth factor
    double mu_max = 1e4;        // penalty cap
    // Stopping tolerance scales with problem size: eps = factor * sqrt(nvar).
    double epsilon_factor = 1e-4;
    int max_iter = 100;
    int max_iter_warm = 10;
    ProxMode prox_mode = ProxMode::BlockShrinkage;
    SweepMode sweep_mode = SweepMode::GaussSeidel;
    SolveKernel solve_kernel = SolveKernel::Woodbury;
    Exec exec = Exec::Parallel;

    double epsilon_for(std::size_t nvar) const;
    void validate() const; // throws ConfigError naming the offending key
};

struct TrackerConfig {
    int cell_size = 4;               // px per cell
    double padding = 2.5;            // search window side / target side
    double label_sigma_factor = 0.1; // sigma = factor * sqrt(w*h) / cell_size
    double learning_rate = 0.015;    // template interpolation rate (eta)
    std::vector<double> scale_factors = default_scale_factors();
    // Width of the Gaussian prior over signed scale indices. Peak responses
    // vary only a few percent between adjacent scale steps, so the prior must
    // stay weak or the tracker never rescales.
    double scale_prior_sigma = 6.0;
    std::vector<FeatureKind> features_enabled = {FeatureKind::Hog, FeatureKind::Cn,
                                                 FeatureKind::Lbp};
    SolverConfig solver;

    static std::vector<double> default_scale_factors(); // {1.02^n : n = -3..3}
    void validate() const; // throws ConfigError naming the offending key

    // Index of the unit scale inside scale_factors.
    int unit_scale_index() const;
};

// Parses the flat "key = value" format; '#' starts a comment, lists are
// comma-separated inside brackets. Unknown keys are rejected, missing keys
// keep their defaults. See configs/default.conf for the full key set.
TrackerConfig parse_config_text(const std::string& text);

// Reads and parses a config file. Unreadable file -> IoError; any violated
// invariant -> ConfigError naming the key.
TrackerConfig load_config(const std::string& path);

} // namespace cotrack
