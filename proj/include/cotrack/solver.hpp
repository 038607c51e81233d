#pragma once

#include <Eigen/Dense>

#include <limits>
#include <ostream>
#include <vector>

#include "cotrack/config.hpp"
#include "cotrack/features.hpp"
#include "cotrack/labels.hpp"
#include "cotrack/spectrum.hpp"
#include "cotrack/tensor.hpp"

namespace cotrack {

// The learned model: per-feature filters w_i plus the stacked consensus
// filter w = [w_1; w_2; ...; w_N] (block order = feature order, each block in
// Tensor layout).
struct FilterBank {
    std::vector<Tensor> per_feature;
    std::vector<double> stacked;

    std::size_t total_size() const;
    // Concatenation of the per-feature blocks in order.
    std::vector<double> concat() const;
};

struct ADMMState {
    std::vector<double> Y; // Lagrange multiplier, same length as stacked
    double mu = 0.0;
    int k = 0;
    double primal_residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    // Per-feature consensus right-hand-side terms Y_i + mu * w_blk_i, cached
    // after each dual step.
    std::vector<std::vector<double>> aggregates;
};

// One training problem: labeled templates x_i (behind the circulant design),
// unlabeled templates u_i (behind the agreement term), and the label grid.
struct ProblemInstance {
    FeatureStack labeled;
    FeatureStack unlabeled;
    LabelMap label;

    void validate() const;
    std::size_t variable_count() const;
    int feature_count() const { return static_cast<int>(labeled.grids.size()); }
};

struct SolveResult {
    FilterBank bank;
    ADMMState state;
};

// Pairwise agreement weight for features i and j under cfg (uniform value or
// explicit matrix).
double pair_weight(const SolverConfig& cfg, int n_features, int i, int j);

// Joint multi-feature filter learning by multi-block ADMM: per-feature
// normal-equation solves in the spectral domain, the consensus prox on the
// stacked filter, dual ascent and the capped geometric mu schedule. Stops at
// primal_residual <= epsilon_for(nvar) or at the iteration cap
// (cfg.max_iter cold, cfg.max_iter_warm when warm_start is given; the result
// carries a converged flag either way). Optional trace receives CSV lines
// (iter, mu, residual, objective, per-block data terms).
SolveResult solve_joint_filters(const ProblemInstance& p, const SolverConfig& cfg,
                                const FilterBank* warm_start = nullptr,
                                std::ostream* trace = nullptr);

// Exact minimizer of feature i's block of the augmented Lagrangian with all
// other blocks fixed.
Tensor subproblem_update(int i, const ProblemInstance& p, const FilterBank& bank,
                         const ADMMState& st, const SolverConfig& cfg);

// Prox of the L1 term at center V with weight lambda0/mu: radial shrinkage of
// the whole vector, or the coordinate-wise soft threshold.
std::vector<double> prox_consensus(const std::vector<double>& V, double lambda0, double mu,
                                   ProxMode mode);

// Y += mu * (stacked - concat); mu grows geometrically up to mu_max; k and
// the primal residual are refreshed.
void dual_update(ADMMState& st, const FilterBank& bank, const SolverConfig& cfg);

// Single-feature ridge filter, solved per frequency through the rank-one
// spectral Gram (for one channel this is the classic quotient against
// |x_hat|^2 + lambda). Zero spectral energy at some frequency with lambda = 0
// -> SingularError.
Tensor closed_form_ridge(const FeatureGrid& x, const LabelMap& y, double ridge_lambda);

// Same ADMM iteration with the circulant operators materialized as explicit
// dense matrices. Verification oracle for desk-scale instances; total
// variable count above 512 -> InvalidArgument.
FilterBank dense_reference_solve(const ProblemInstance& p, const SolverConfig& cfg,
                                 ADMMState* final_state = nullptr);

// Explicit circulant-block design matrix of a multi-channel template: an
// n x (n*C) matrix whose row at shift d holds the d-shifted template, so its
// product with a stacked channel vector is the channel-summed correlation.
Eigen::MatrixXd circulant_design_matrix(const Tensor& tpl);

} // namespace cotrack
