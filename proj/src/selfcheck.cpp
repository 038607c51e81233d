#include "cotrack/selfcheck.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cotrack/errors.hpp"
#include "cotrack/labels.hpp"
#include "cotrack/spectrum.hpp"

namespace cotrack {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Tensor random_tensor(std::mt19937_64& rng, int rows, int cols, int channels) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Tensor t(rows, cols, channels);
    for (auto& v : t.data())
        v = dist(rng);
    return t;
}

double rel_err(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

} // namespace

ProblemInstance make_random_instance(std::uint64_t seed, int rows, int cols,
                                     const std::vector<int>& channels) {
    std::mt19937_64 rng(seed);
    ProblemInstance p;
    for (int C : channels) {
        FeatureGrid xg, ug;
        xg.kind = ug.kind = FeatureKind::Hog;
        xg.cell_size = ug.cell_size = 1;
        xg.values = random_tensor(rng, rows, cols, C);
        ug.values = random_tensor(rng, rows, cols, C);
        p.labeled.grids.push_back(std::move(xg));
        p.unlabeled.grids.push_back(std::move(ug));
    }
    p.labeled.windowed = p.unlabeled.windowed = true;
    p.label = gaussian_label(rows, cols, std::max(0.75, rows / 8.0));
    return p;
}

SweepBenchmark benchmark_subproblem_sweep(int rows, int cols, int channels) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto random_spectrum = [&](Spectrum& s) {
        s = Spectrum(rows, cols, channels);
        for (auto& z : s.data())
            z = cplx(dist(rng), dist(rng));
    };
    Spectrum a, b, rhs;
    random_spectrum(a);
    random_spectrum(b);
    random_spectrum(rhs);
    const double alpha = 2.0, beta = 0.3, mu = 0.5;

    SweepBenchmark bench;
    Spectrum fast, dense;
    bench.woodbury_seconds = 1e300;
    bench.dense_seconds = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
        auto t0 = Clock::now();
        solve_all_bins(a, b, alpha, beta, mu, rhs, fast, SolveKernel::Woodbury, Exec::Serial);
        bench.woodbury_seconds = std::min(bench.woodbury_seconds, seconds_since(t0));
        t0 = Clock::now();
        solve_all_bins(a, b, alpha, beta, mu, rhs, dense, SolveKernel::Dense, Exec::Serial);
        bench.dense_seconds = std::min(bench.dense_seconds, seconds_since(t0));
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fast.data().size(); ++i) {
        num += std::norm(fast.data()[i] - dense.data()[i]);
        den += std::norm(dense.data()[i]);
    }
    bench.max_rel_err = std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
    return bench;
}

namespace {

CheckResult check_prox_block() {
    auto t0 = Clock::now();
    CheckResult r{"prox_block_shrinkage", true, "", 0.0};
    const auto out = prox_consensus({3.0, 4.0}, 1.0, 1.0, ProxMode::BlockShrinkage);
    const auto zero = prox_consensus({0.3, 0.4}, 1.0, 1.0, ProxMode::BlockShrinkage);
    if (std::abs(out[0] - 2.4) > 1e-12 || std::abs(out[1] - 3.2) > 1e-12) {
        r.pass = false;
        r.detail = "shrinkage of (3,4) returned wrong values";
    }
    if (zero[0] != 0.0 || zero[1] != 0.0) {
        r.pass = false;
        r.detail = "sub-threshold vector did not collapse to zero";
    }
    r.seconds = seconds_since(t0);
    return r;
}

CheckResult check_prox_soft() {
    auto t0 = Clock::now();
    CheckResult r{"prox_soft_threshold", true, "", 0.0};
    const auto out = prox_consensus({3.0, 4.0}, 1.0, 1.0, ProxMode::ElementwiseSoftThreshold);
    const auto mix = prox_consensus({-3.0, 0.5}, 1.0, 1.0, ProxMode::ElementwiseSoftThreshold);
    if (std::abs(out[0] - 2.0) > 1e-12 || std::abs(out[1] - 3.0) > 1e-12 ||
        std::abs(mix[0] + 2.0) > 1e-12 || mix[1] != 0.0) {
        r.pass = false;
        r.detail = "soft threshold returned wrong values";
    }
    r.seconds = seconds_since(t0);
    return r;
}

CheckResult check_ridge_degeneracy() {
    auto t0 = Clock::now();
    CheckResult r{"ridge_degeneracy", true, "", 0.0};
    for (std::uint64_t seed = 1; seed <= 2 && r.pass; ++seed) {
        const int C = seed == 1 ? 1 : 2;
        ProblemInstance p = make_random_instance(seed, 8, 8, {C});
        SolverConfig cfg;
        cfg.lambda0 = 0.0;
        cfg.lambda_pair = 0.0;
        cfg.ridge_lambda = 0.05;
        cfg.mu0 = 2.0 * cfg.ridge_lambda; // the N=1 fixed point is this ridge
        const SolveResult res = solve_joint_filters(p, cfg);
        const Tensor ridge = closed_form_ridge(p.labeled.grids[0], p.label, cfg.ridge_lambda);
        const double err = rel_err(res.bank.per_feature[0].data(), ridge.data());
        if (!res.state.converged || err > 1e-6) {
            r.pass = false;
            std::ostringstream os;
            os << "seed " << seed << " rel err " << err;
            r.detail = os.str();
        }
    }
    r.seconds = seconds_since(t0);
    return r;
}

CheckResult check_dense_vs_spectral() {
    auto t0 = Clock::now();
    CheckResult r{"dense_vs_spectral", true, "", 0.0};
    for (std::uint64_t seed = 11; seed <= 12 && r.pass; ++seed) {
        ProblemInstance p = make_random_instance(seed, 4, 4, {1, 1});
        SolverConfig cfg;
        const SolveResult fast = solve_joint_filters(p, cfg);
        ADMMState dense_state;
        const FilterBank dense = dense_reference_solve(p, cfg, &dense_state);
        const double err = rel_err(fast.bank.stacked, dense.stacked);
        if (!fast.state.converged || !dense_state.converged || err > 1e-6) {
            r.pass = false;
            std::ostringstream os;
            os << "seed " << seed << " rel err " << err;
            r.detail = os.str();
        }
    }
    r.seconds = seconds_since(t0);
    return r;
}

// Dense evaluation of one block of the augmented Lagrangian; the arbiter for
// the subproblem's sign conventions.
double block_objective(const ProblemInstance& p, const SolverConfig& cfg, int i,
                       const std::vector<Eigen::MatrixXd>& Phi,
                       const std::vector<Eigen::MatrixXd>& Psi, const Eigen::VectorXd& y,
                       const FilterBank& bank, const ADMMState& st,
                       const Eigen::VectorXd& v) {
    const int N = p.feature_count();
    double obj = (Phi[i] * v - y).squaredNorm();
    for (int j = 0; j < N; ++j) {
        const double lam = pair_weight(cfg, N, i, j);
        if (j == i || lam <= 0.0)
            continue;
        Eigen::VectorXd wj(static_cast<Eigen::Index>(bank.per_feature[j].size()));
        for (Eigen::Index t = 0; t < wj.size(); ++t)
            wj(t) = bank.per_feature[j].data()[t];
        obj += lam * (Psi[i] * v - Psi[j] * wj).squaredNorm();
    }
    std::size_t off = 0;
    for (int j = 0; j < i; ++j)
        off += bank.per_feature[j].size();
    double lin = 0.0, quad = 0.0;
    for (Eigen::Index t = 0; t < v.size(); ++t) {
        lin += st.Y[off + t] * v(t);
        const double d = v(t) - bank.stacked[off + t];
        quad += d * d;
    }
    return obj - lin + 0.5 * st.mu * quad;
}

CheckResult check_block_gradient() {
    auto t0 = Clock::now();
    CheckResult r{"blockwise_gradient", true, "", 0.0};
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (std::uint64_t seed = 21; seed <= 22 && r.pass; ++seed) {
        ProblemInstance p = make_random_instance(seed, 4, 4, {1, 2});
        SolverConfig cfg;
        cfg.lambda_pair = 0.4;
        const int N = p.feature_count();
        std::vector<Eigen::MatrixXd> Phi(N), Psi(N);
        for (int j = 0; j < N; ++j) {
            Phi[j] = circulant_design_matrix(p.labeled.grids[j].values);
            Psi[j] = circulant_design_matrix(p.unlabeled.grids[j].values);
        }
        Eigen::VectorXd y(p.label.values.size());
        for (Eigen::Index t = 0; t < y.size(); ++t)
            y(t) = p.label.values.data()[t];

        FilterBank bank;
        for (int j = 0; j < N; ++j)
            bank.per_feature.push_back(random_tensor(rng, 4, 4, p.labeled.grids[j]
                                                                    .values.channels()));
        bank.stacked = bank.concat();
        for (auto& v : bank.stacked)
            v += dist(rng);
        ADMMState st;
        st.Y.resize(bank.stacked.size());
        for (auto& v : st.Y)
            v = dist(rng);
        st.mu = 0.7;

        for (int i = 0; i < N && r.pass; ++i) {
            const Tensor wi = subproblem_update(i, p, bank, st, cfg);
            Eigen::VectorXd v(static_cast<Eigen::Index>(wi.size()));
            for (Eigen::Index t = 0; t < v.size(); ++t)
                v(t) = wi.data()[t];
            const double h = 1e-5;
            double grad_sq = 0.0, grad0_sq = 0.0;
            Eigen::VectorXd zero = Eigen::VectorXd::Zero(v.size());
            for (Eigen::Index t = 0; t < v.size(); ++t) {
                Eigen::VectorXd vp = v, vm = v;
                vp(t) += h;
                vm(t) -= h;
                const double g = (block_objective(p, cfg, i, Phi, Psi, y, bank, st, vp) -
                                  block_objective(p, cfg, i, Phi, Psi, y, bank, st, vm)) /
                                 (2.0 * h);
                grad_sq += g * g;
                vp = zero;
                vm = zero;
                vp(t) += h;
                vm(t) -= h;
                const double g0 = (block_objective(p, cfg, i, Phi, Psi, y, bank, st, vp) -
                                   block_objective(p, cfg, i, Phi, Psi, y, bank, st, vm)) /
                                  (2.0 * h);
                grad0_sq += g0 * g0;
            }
            const double bound = 1e-5 * (1.0 + std::sqrt(grad0_sq));
            if (std::sqrt(grad_sq) > bound) {
                r.pass = false;
                std::ostringstream os;
                os << "block " << i << " grad norm " << std::sqrt(grad_sq) << " > " << bound;
                r.detail = os.str();
            }
        }
    }
    r.seconds = seconds_since(t0);
    return r;
}

CheckResult check_correlation_oracle() {
    auto t0 = Clock::now();
    CheckResult r{"correlation_oracle", true, "", 0.0};
    std::mt19937_64 rng(5);
    const int rows = 8, cols = 8, C = 2;
    const Tensor tpl = random_tensor(rng, rows, cols, C);
    const Tensor flt = random_tensor(rng, rows, cols, C);
    const ResponseMap fast =
        correlation_response(forward_spectrum(tpl), forward_spectrum(flt));
    double max_err = 0.0;
    for (int dr = 0; dr < rows; ++dr)
        for (int dc = 0; dc < cols; ++dc) {
            double acc = 0.0;
            for (int ch = 0; ch < C; ++ch)
                for (int rr = 0; rr < rows; ++rr)
                    for (int cc = 0; cc < cols; ++cc)
                        acc += tpl.at(((rr - dr) % rows + rows) % rows,
                                      ((cc - dc) % cols + cols) % cols, ch) *
                               flt.at(rr, cc, ch);
            max_err = std::max(max_err, std::abs(acc - fast.values.at(dr, dc)));
        }
    if (max_err > 1e-6) {
        r.pass = false;
        std::ostringstream os;
        os << "max abs err " << max_err;
        r.detail = os.str();
    }
    r.seconds = seconds_since(t0);
    return r;
}

CheckResult check_mu_schedule() {
    auto t0 = Clock::now();
    CheckResult r{"mu_schedule", true, "", 0.0};
    SolverConfig cfg;
    cfg.mu0 = 1.0;
    cfg.rho = 2.0;
    cfg.mu_max = 4.0;
    FilterBank bank;
    bank.per_feature.emplace_back(1, 1, 1);
    bank.stacked = {0.0};
    ADMMState st;
    st.Y = {0.0};
    st.mu = cfg.mu0;
    std::vector<double> mus{st.mu};
    for (int k = 0; k < 8; ++k) {
        dual_update(st, bank, cfg);
        mus.push_back(st.mu);
    }
    const std::vector<double> expect{1, 2, 4, 4, 4, 4, 4, 4, 4};
    bool capped = false;
    for (std::size_t k = 0; k < mus.size(); ++k) {
        if (mus[k] != expect[k])
            r.pass = false;
        if (k > 0 && mus[k] < mus[k - 1])
            r.pass = false;
        if (mus[k] == cfg.mu_max)
            capped = true;
    }
    // The capped tail keeps 1/mu constant, so sum(1/mu_k) grows without bound.
    if (!capped || cfg.mu_max == std::numeric_limits<double>::infinity())
        r.pass = false;
    if (!r.pass)
        r.detail = "mu sequence is not the capped geometric schedule";
    r.seconds = seconds_since(t0);
    return r;
}

CheckResult check_sweep_speed() {
    auto t0 = Clock::now();
    CheckResult r{"woodbury_sweep_speed", true, "", 0.0};
    const SweepBenchmark b = benchmark_subproblem_sweep(32, 32, 31);
    std::ostringstream os;
    os << "woodbury " << b.woodbury_seconds * 1e3 << " ms, dense " << b.dense_seconds * 1e3
       << " ms, rel err " << b.max_rel_err;
    r.detail = os.str();
    if (b.max_rel_err > 1e-8 || b.dense_seconds < 5.0 * b.woodbury_seconds)
        r.pass = false;
    r.seconds = seconds_since(t0);
    return r;
}

} // namespace

std::vector<CheckResult> run_selfcheck() {
    std::vector<CheckResult> results;
    results.push_back(check_prox_block());
    results.push_back(check_prox_soft());
    results.push_back(check_ridge_degeneracy());
    results.push_back(check_dense_vs_spectral());
    results.push_back(check_block_gradient());
    results.push_back(check_correlation_oracle());
    results.push_back(check_mu_schedule());
    results.push_back(check_sweep_speed());
    return results;
}

} // namespace cotrack
