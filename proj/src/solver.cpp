#include "cotrack/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>

#include "cotrack/errors.hpp"

namespace cotrack {

std::size_t FilterBank::total_size() const {
    std::size_t n = 0;
    for (const auto& t : per_feature)
        n += t.size();
    return n;
}

std::vector<double> FilterBank::concat() const {
    std::vector<double> out;
    out.reserve(total_size());
    for (const auto& t : per_feature)
        out.insert(out.end(), t.data().begin(), t.data().end());
    return out;
}

void ProblemInstance::validate() const {
    if (labeled.grids.empty())
        throw InvalidArgument("solver: instance has no labeled templates");
    if (unlabeled.grids.size() != labeled.grids.size())
        throw InvalidArgument("solver: labeled/unlabeled feature counts differ");
    const int rows = label.values.rows(), cols = label.values.cols();
    if (rows < 1 || cols < 1 || label.values.channels() != 1)
        throw InvalidArgument("solver: label must be a rows x cols x 1 grid");
    for (std::size_t i = 0; i < labeled.grids.size(); ++i) {
        const auto& xg = labeled.grids[i].values;
        const auto& ug = unlabeled.grids[i].values;
        if (xg.rows() != rows || xg.cols() != cols || ug.rows() != rows || ug.cols() != cols)
            throw InvalidArgument("solver: template dims must match the label grid");
        if (xg.channels() != ug.channels())
            throw InvalidArgument("solver: labeled/unlabeled channel counts differ");
        if (xg.channels() < 1)
            throw InvalidArgument("solver: empty feature channels");
    }
}

std::size_t ProblemInstance::variable_count() const {
    std::size_t n = 0;
    for (const auto& g : labeled.grids)
        n += g.values.size();
    return n;
}

double pair_weight(const SolverConfig& cfg, int n_features, int i, int j) {
    if (i == j)
        return 0.0;
    if (!cfg.lambda_pair_matrix.empty()) {
        if (cfg.lambda_pair_matrix.size() !=
            static_cast<std::size_t>(n_features) * n_features)
            throw ConfigError("config: lambda_pair_matrix size does not match feature count");
        return cfg.lambda_pair_matrix[static_cast<std::size_t>(i) * n_features + j];
    }
    return cfg.lambda_pair;
}

std::vector<double> prox_consensus(const std::vector<double>& V, double lambda0, double mu,
                                   ProxMode mode) {
    if (!(mu > 0.0))
        throw InvalidArgument("prox_consensus: mu must be positive");
    if (lambda0 < 0.0)
        throw InvalidArgument("prox_consensus: lambda0 must be >= 0");
    const double thr = lambda0 / mu;
    std::vector<double> out(V.size(), 0.0);
    if (mode == ProxMode::BlockShrinkage) {
        double nrm = 0.0;
        for (double v : V)
            nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm > thr) {
            const double f = 1.0 - thr / nrm;
            for (std::size_t t = 0; t < V.size(); ++t)
                out[t] = f * V[t];
        }
    } else {
        for (std::size_t t = 0; t < V.size(); ++t) {
            const double v = V[t];
            const double m = std::abs(v) - thr;
            out[t] = m > 0.0 ? (v < 0.0 ? -m : m) : 0.0;
        }
    }
    return out;
}

namespace {

std::vector<std::size_t> block_offsets(const ProblemInstance& p) {
    std::vector<std::size_t> off(p.labeled.grids.size() + 1, 0);
    for (std::size_t i = 0; i < p.labeled.grids.size(); ++i)
        off[i + 1] = off[i] + p.labeled.grids[i].values.size();
    return off;
}

void refresh_aggregates(ADMMState& st, const FilterBank& bank) {
    st.aggregates.resize(bank.per_feature.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < bank.per_feature.size(); ++i) {
        const std::size_t len = bank.per_feature[i].size();
        auto& agg = st.aggregates[i];
        agg.resize(len);
        for (std::size_t t = 0; t < len; ++t)
            agg[t] = st.Y[off + t] + st.mu * bank.stacked[off + t];
        off += len;
    }
}

} // namespace

void dual_update(ADMMState& st, const FilterBank& bank, const SolverConfig& cfg) {
    const auto concat = bank.concat();
    if (bank.stacked.size() != concat.size() || st.Y.size() != concat.size())
        throw InvalidArgument("dual_update: inconsistent filter bank / state sizes");
    double ss = 0.0;
    for (std::size_t t = 0; t < concat.size(); ++t) {
        const double r = bank.stacked[t] - concat[t];
        st.Y[t] += st.mu * r;
        ss += r * r;
    }
    st.primal_residual = std::sqrt(ss);
    st.mu = std::min(cfg.rho * st.mu, cfg.mu_max);
    st.k += 1;
    refresh_aggregates(st, bank);
}

namespace {

// Shared machinery of the spectral ADMM path: cached template and label
// spectra plus the block solve used by both solve_joint_filters and the
// public subproblem_update.
class AdmmEngine {
public:
    AdmmEngine(const ProblemInstance& p, const SolverConfig& cfg) : p_(p), cfg_(cfg) {
        p.validate();
        cfg.validate();
        N_ = p.feature_count();
        rows_ = p.label.values.rows();
        cols_ = p.label.values.cols();
        n_ = static_cast<std::size_t>(rows_) * cols_;
        offsets_ = block_offsets(p);
        yhat_ = forward_spectrum(p.label.values, cfg.exec);
        xhat_.reserve(N_);
        uhat_.reserve(N_);
        for (int i = 0; i < N_; ++i) {
            xhat_.push_back(forward_spectrum(p.labeled.grids[i].values, cfg.exec));
            uhat_.push_back(forward_spectrum(p.unlabeled.grids[i].values, cfg.exec));
        }
        lambda_sum_.resize(N_, 0.0);
        for (int i = 0; i < N_; ++i)
            for (int j = 0; j < N_; ++j)
                lambda_sum_[i] += pair_weight(cfg, N_, i, j);
    }

    int feature_count() const { return N_; }
    std::size_t total_size() const { return offsets_.back(); }
    int channels(int i) const { return p_.labeled.grids[i].values.channels(); }
    std::size_t offset(int i) const { return offsets_[i]; }

    // Agreement response of feature j on the unlabeled sample: per bin
    // s_j = sum_c conj(u_hat_jc) * w_hat_jc.
    void accumulate_agreement(int j, const Spectrum& what_j, double weight,
                              std::vector<cplx>& smix) const {
        const int C = what_j.channels();
        parallel_for(static_cast<std::int64_t>(n_), cfg_.exec, [&](std::int64_t bin) {
            cplx acc(0.0, 0.0);
            for (int c = 0; c < C; ++c)
                acc += std::conj(uhat_[j].plane(c)[bin]) * what_j.plane(c)[bin];
            smix[bin] += weight * acc;
        });
    }

    // Solves block i of the augmented Lagrangian given the other blocks'
    // filter spectra, the multiplier and the stacked consensus filter.
    Spectrum solve_block(int i, const std::vector<Spectrum>& what,
                         const std::vector<double>& Y, const std::vector<double>& stacked,
                         double mu) const {
        const int C = channels(i);
        Tensor yblk(rows_, cols_, C), wblk(rows_, cols_, C);
        std::copy_n(Y.data() + offsets_[i], yblk.size(), yblk.data().data());
        std::copy_n(stacked.data() + offsets_[i], wblk.size(), wblk.data().data());
        const Spectrum Yhat = forward_spectrum(yblk, cfg_.exec);
        const Spectrum Bhat = forward_spectrum(wblk, cfg_.exec);

        std::vector<cplx> smix(n_, cplx(0.0, 0.0));
        for (int j = 0; j < N_; ++j) {
            const double lam = pair_weight(cfg_, N_, i, j);
            if (j != i && lam > 0.0)
                accumulate_agreement(j, what[j], lam, smix);
        }

        Spectrum rhs(rows_, cols_, C);
        parallel_for(static_cast<std::int64_t>(n_), cfg_.exec, [&](std::int64_t bin) {
            const cplx yv = yhat_.plane(0)[bin];
            const cplx sv = smix[bin];
            for (int c = 0; c < C; ++c)
                rhs.plane(c)[bin] = 2.0 * xhat_[i].plane(c)[bin] * yv +
                                    2.0 * uhat_[i].plane(c)[bin] * sv +
                                    Yhat.plane(c)[bin] + mu * Bhat.plane(c)[bin];
        });

        Spectrum out;
        solve_all_bins(xhat_[i], uhat_[i], 2.0, 2.0 * lambda_sum_[i], mu, rhs, out,
                       cfg_.solve_kernel, cfg_.exec);
        return out;
    }

    // Eq.-style objective pieces, evaluated spectrally (Parseval).
    double data_term(int i, const Spectrum& what_i) const {
        double acc = 0.0;
        const int C = what_i.channels();
        for (std::size_t bin = 0; bin < n_; ++bin) {
            cplx r(0.0, 0.0);
            for (int c = 0; c < C; ++c)
                r += std::conj(xhat_[i].plane(c)[bin]) * what_i.plane(c)[bin];
            acc += std::norm(r - yhat_.plane(0)[bin]);
        }
        return acc / static_cast<double>(n_);
    }

    double pair_term(int i, int j, const std::vector<Spectrum>& what) const {
        double acc = 0.0;
        for (std::size_t bin = 0; bin < n_; ++bin) {
            cplx si(0.0, 0.0), sj(0.0, 0.0);
            for (int c = 0; c < what[i].channels(); ++c)
                si += std::conj(uhat_[i].plane(c)[bin]) * what[i].plane(c)[bin];
            for (int c = 0; c < what[j].channels(); ++c)
                sj += std::conj(uhat_[j].plane(c)[bin]) * what[j].plane(c)[bin];
            acc += std::norm(si - sj);
        }
        return acc / static_cast<double>(n_);
    }

    const SolverConfig& cfg() const { return cfg_; }
    const ProblemInstance& instance() const { return p_; }

private:
    const ProblemInstance& p_;
    SolverConfig cfg_;
    int N_ = 0;
    int rows_ = 0, cols_ = 0;
    std::size_t n_ = 0;
    std::vector<std::size_t> offsets_;
    Spectrum yhat_;
    std::vector<Spectrum> xhat_, uhat_;
    std::vector<double> lambda_sum_;
};

void check_finite(const FilterBank& bank, const ADMMState& st) {
    for (const auto& t : bank.per_feature)
        for (double v : t.data())
            if (!std::isfinite(v))
                throw NumericalError("solver: non-finite filter iterate");
    for (double v : bank.stacked)
        if (!std::isfinite(v))
            throw NumericalError("solver: non-finite consensus iterate");
    for (double v : st.Y)
        if (!std::isfinite(v))
            throw NumericalError("solver: non-finite multiplier");
}

} // namespace

SolveResult solve_joint_filters(const ProblemInstance& p, const SolverConfig& cfg,
                                const FilterBank* warm_start, std::ostream* trace) {
    AdmmEngine eng(p, cfg);
    const int N = eng.feature_count();
    const std::size_t total = eng.total_size();

    FilterBank bank;
    if (warm_start) {
        if (warm_start->per_feature.size() != static_cast<std::size_t>(N))
            throw InvalidArgument("solve_joint_filters: warm start feature count mismatch");
        bank = *warm_start;
        for (int i = 0; i < N; ++i)
            if (!bank.per_feature[i].same_shape(p.labeled.grids[i].values))
                throw InvalidArgument("solve_joint_filters: warm start dims mismatch");
        if (bank.stacked.size() != total)
            bank.stacked = bank.concat();
    } else {
        for (int i = 0; i < N; ++i)
            bank.per_feature.emplace_back(p.label.values.rows(), p.label.values.cols(),
                                          eng.channels(i));
        bank.stacked.assign(total, 0.0);
    }

    ADMMState st;
    st.Y.assign(total, 0.0);
    st.mu = cfg.mu0;
    refresh_aggregates(st, bank);

    std::vector<Spectrum> what(N);
    for (int i = 0; i < N; ++i)
        what[i] = forward_spectrum(bank.per_feature[i], cfg.exec);

    const int max_iter = warm_start ? cfg.max_iter_warm : cfg.max_iter;
    const double eps = cfg.epsilon_for(total);

    if (trace) {
        *trace << "iter,mu,primal_residual,objective";
        for (int i = 0; i < N; ++i)
            *trace << ",block" << i;
        *trace << "\n";
    }

    for (int iter = 0; iter < max_iter; ++iter) {
        const double mu = st.mu;
        std::vector<Spectrum> snapshot;
        const std::vector<Spectrum>* source = &what;
        if (cfg.sweep_mode == SweepMode::Jacobi) {
            snapshot = what;
            source = &snapshot;
        }
        for (int i = 0; i < N; ++i) {
            what[i] = eng.solve_block(i, *source, st.Y, bank.stacked, mu);
            bank.per_feature[i] = inverse_spectrum(what[i], cfg.exec);
        }

        std::vector<double> V = bank.concat();
        for (std::size_t t = 0; t < total; ++t)
            V[t] -= st.Y[t] / mu;
        bank.stacked = prox_consensus(V, cfg.lambda0, mu, cfg.prox_mode);

        dual_update(st, bank, cfg);
        check_finite(bank, st);

        if (trace) {
            double l1 = 0.0;
            for (double v : bank.stacked)
                l1 += std::abs(v);
            double obj = cfg.lambda0 * l1;
            std::vector<double> blocks(N);
            for (int i = 0; i < N; ++i) {
                blocks[i] = eng.data_term(i, what[i]);
                obj += blocks[i];
            }
            for (int i = 0; i < N; ++i)
                for (int j = i + 1; j < N; ++j) {
                    const double lam = pair_weight(cfg, N, i, j);
                    if (lam > 0.0)
                        obj += lam * eng.pair_term(i, j, what);
                }
            *trace << st.k << "," << st.mu << "," << st.primal_residual << "," << obj;
            for (int i = 0; i < N; ++i)
                *trace << "," << blocks[i];
            *trace << "\n";
        }

        if (st.primal_residual <= eps) {
            st.converged = true;
            break;
        }
    }
    return {std::move(bank), std::move(st)};
}

Tensor subproblem_update(int i, const ProblemInstance& p, const FilterBank& bank,
                         const ADMMState& st, const SolverConfig& cfg) {
    AdmmEngine eng(p, cfg);
    const int N = eng.feature_count();
    if (i < 0 || i >= N)
        throw InvalidArgument("subproblem_update: feature index out of range");
    if (bank.per_feature.size() != static_cast<std::size_t>(N) ||
        bank.stacked.size() != eng.total_size() || st.Y.size() != eng.total_size())
        throw InvalidArgument("subproblem_update: inconsistent bank / state sizes");
    if (!(st.mu > 0.0))
        throw InvalidArgument("subproblem_update: state mu must be positive");

    std::vector<Spectrum> what(N);
    for (int j = 0; j < N; ++j)
        what[j] = forward_spectrum(bank.per_feature[j], cfg.exec);
    const Spectrum solved = eng.solve_block(i, what, st.Y, bank.stacked, st.mu);
    return inverse_spectrum(solved, cfg.exec);
}

Tensor closed_form_ridge(const FeatureGrid& x, const LabelMap& y, double ridge_lambda) {
    if (x.values.rows() != y.values.rows() || x.values.cols() != y.values.cols())
        throw InvalidArgument("closed_form_ridge: template and label dims differ");
    if (ridge_lambda < 0.0)
        throw InvalidArgument("closed_form_ridge: lambda must be >= 0");
    const Spectrum a = forward_spectrum(x.values);
    const Spectrum yh = forward_spectrum(y.values);
    const int C = a.channels();
    Spectrum wh(a.rows(), a.cols(), C);
    const std::size_t n = a.plane_size();
    for (std::size_t bin = 0; bin < n; ++bin) {
        double energy = 0.0;
        for (int c = 0; c < C; ++c)
            energy += std::norm(a.plane(c)[bin]);
        const double denom = energy + ridge_lambda;
        if (denom <= 0.0)
            throw SingularError("closed_form_ridge: zero spectral energy with lambda = 0");
        const cplx scale = yh.plane(0)[bin] / denom;
        for (int c = 0; c < C; ++c)
            wh.plane(c)[bin] = a.plane(c)[bin] * scale;
    }
    return inverse_spectrum(wh);
}

Eigen::MatrixXd circulant_design_matrix(const Tensor& tpl) {
    const int R = tpl.rows(), Cc = tpl.cols(), CH = tpl.channels();
    const int n = R * Cc;
    Eigen::MatrixXd M(n, static_cast<Eigen::Index>(n) * CH);
    for (int ch = 0; ch < CH; ++ch)
        for (int dr = 0; dr < R; ++dr)
            for (int dc = 0; dc < Cc; ++dc) {
                const int p = dr * Cc + dc;
                for (int r = 0; r < R; ++r)
                    for (int c = 0; c < Cc; ++c) {
                        const int sr = ((r - dr) % R + R) % R;
                        const int sc = ((c - dc) % Cc + Cc) % Cc;
                        M(p, static_cast<Eigen::Index>(ch) * n + r * Cc + c) =
                            tpl.at(sr, sc, ch);
                    }
            }
    return M;
}

FilterBank dense_reference_solve(const ProblemInstance& p, const SolverConfig& cfg,
                                 ADMMState* final_state) {
    p.validate();
    cfg.validate();
    const std::size_t total = p.variable_count();
    if (total > 512)
        throw InvalidArgument("dense_reference_solve: instance too large (> 512 variables)");

    const int N = p.feature_count();
    const int rows = p.label.values.rows(), cols = p.label.values.cols();
    const int n = rows * cols;
    const auto offsets = block_offsets(p);

    std::vector<Eigen::MatrixXd> Phi(N), Psi(N);
    for (int i = 0; i < N; ++i) {
        Phi[i] = circulant_design_matrix(p.labeled.grids[i].values);
        Psi[i] = circulant_design_matrix(p.unlabeled.grids[i].values);
    }
    Eigen::VectorXd y(n);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            y(r * cols + c) = p.label.values.at(r, c);

    FilterBank bank;
    for (int i = 0; i < N; ++i)
        bank.per_feature.emplace_back(rows, cols, p.labeled.grids[i].values.channels());
    bank.stacked.assign(total, 0.0);

    ADMMState st;
    st.Y.assign(total, 0.0);
    st.mu = cfg.mu0;
    refresh_aggregates(st, bank);

    const double eps = cfg.epsilon_for(total);
    std::vector<Eigen::VectorXd> w(N);
    for (int i = 0; i < N; ++i)
        w[i] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bank.per_feature[i].size()));

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const double mu = st.mu;
        std::vector<Eigen::VectorXd> source = w; // Jacobi reads the snapshot
        for (int i = 0; i < N; ++i) {
            const auto dim = static_cast<Eigen::Index>(bank.per_feature[i].size());
            double lam_sum = 0.0;
            Eigen::VectorXd rhs = 2.0 * Phi[i].transpose() * y;
            for (int j = 0; j < N; ++j) {
                const double lam = pair_weight(cfg, N, i, j);
                if (j == i || lam <= 0.0)
                    continue;
                lam_sum += lam;
                const Eigen::VectorXd& wj =
                    cfg.sweep_mode == SweepMode::Jacobi ? source[j] : w[j];
                rhs.noalias() += 2.0 * lam * (Psi[i].transpose() * (Psi[j] * wj));
            }
            for (Eigen::Index t = 0; t < dim; ++t)
                rhs(t) += st.Y[offsets[i] + t] + mu * bank.stacked[offsets[i] + t];

            Eigen::MatrixXd M = 2.0 * Phi[i].transpose() * Phi[i];
            if (lam_sum > 0.0)
                M.noalias() += 2.0 * lam_sum * Psi[i].transpose() * Psi[i];
            M.diagonal().array() += mu;
            w[i] = M.llt().solve(rhs);
            std::copy_n(w[i].data(), dim, bank.per_feature[i].data().data());
        }

        std::vector<double> V = bank.concat();
        for (std::size_t t = 0; t < total; ++t)
            V[t] -= st.Y[t] / mu;
        bank.stacked = prox_consensus(V, cfg.lambda0, mu, cfg.prox_mode);

        dual_update(st, bank, cfg);
        check_finite(bank, st);
        if (st.primal_residual <= eps) {
            st.converged = true;
            break;
        }
    }
    if (final_state)
        *final_state = st;
    return bank;
}

} // namespace cotrack
