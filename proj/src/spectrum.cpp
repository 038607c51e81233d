#include "cotrack/spectrum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "cotrack/errors.hpp"
#include "fft_backend.hpp"

namespace cotrack {

Spectrum forward_spectrum(const Tensor& grid, Exec exec) {
    if (grid.rows() < 1 || grid.cols() < 1 || grid.channels() < 1)
        throw InvalidArgument("forward_spectrum: empty grid");
    Spectrum out(grid.rows(), grid.cols(), grid.channels());
    parallel_for(grid.channels(), exec, [&](std::int64_t ch) {
        const auto src = grid.plane(static_cast<int>(ch));
        std::vector<cplx> buf(src.size());
        for (std::size_t i = 0; i < src.size(); ++i)
            buf[i] = cplx(src[i], 0.0);
        detail::dft2d(grid.rows(), grid.cols(), buf.data(),
                      out.plane(static_cast<int>(ch)).data(), -1);
    });
    return out;
}

Tensor inverse_spectrum(const Spectrum& s, Exec exec) {
    if (s.rows() < 1 || s.cols() < 1 || s.channels() < 1)
        throw InvalidArgument("inverse_spectrum: empty spectrum");
    Tensor out(s.rows(), s.cols(), s.channels());
    const double scale = 1.0 / static_cast<double>(s.plane_size());
    // Per-channel residue sums are combined in channel order afterwards so
    // the result does not depend on the execution policy.
    std::vector<double> imag_sq(s.channels(), 0.0), full_sq(s.channels(), 0.0);
    parallel_for(s.channels(), exec, [&](std::int64_t ch) {
        const auto src = s.plane(static_cast<int>(ch));
        std::vector<cplx> buf(src.size());
        detail::dft2d(s.rows(), s.cols(), src.data(), buf.data(), +1);
        auto dst = out.plane(static_cast<int>(ch));
        double isq = 0.0, fsq = 0.0;
        for (std::size_t i = 0; i < buf.size(); ++i) {
            const cplx z = buf[i] * scale;
            dst[i] = z.real();
            isq += z.imag() * z.imag();
            fsq += std::norm(z);
        }
        imag_sq[ch] = isq;
        full_sq[ch] = fsq;
    });
    double isq = 0.0, fsq = 0.0;
    for (int ch = 0; ch < s.channels(); ++ch) {
        isq += imag_sq[ch];
        fsq += full_sq[ch];
    }
    if (fsq > 0.0 && std::sqrt(isq) > 1e-6 * std::sqrt(fsq))
        throw NumericalError("inverse_spectrum: non-real result, imaginary residue " +
                             std::to_string(std::sqrt(isq / fsq)) + " relative");
    return out;
}

ResponseMap make_response_map(Tensor values) {
    ResponseMap r;
    r.peak_row = 0;
    r.peak_col = 0;
    r.peak_value = values.at(0, 0);
    for (int row = 0; row < values.rows(); ++row)
        for (int col = 0; col < values.cols(); ++col)
            if (values.at(row, col) > r.peak_value) {
                r.peak_value = values.at(row, col);
                r.peak_row = row;
                r.peak_col = col;
            }
    r.values = std::move(values);
    return r;
}

ResponseMap correlation_response(const Spectrum& template_spec, const Spectrum& filter_spec,
                                 Exec exec) {
    if (!template_spec.same_shape(filter_spec))
        throw InvalidArgument("correlation_response: dimension mismatch");
    const auto n = template_spec.plane_size();
    Spectrum acc(template_spec.rows(), template_spec.cols(), 1);
    auto out = acc.plane(0);
    parallel_for(static_cast<std::int64_t>(n), exec, [&](std::int64_t i) {
        cplx sum(0.0, 0.0);
        for (int ch = 0; ch < template_spec.channels(); ++ch)
            sum += std::conj(template_spec.plane(ch)[i]) * filter_spec.plane(ch)[i];
        out[i] = sum;
    });
    return make_response_map(inverse_spectrum(acc, exec));
}

void per_frequency_solve(std::span<const cplx> a, std::span<const cplx> b, double alpha,
                         double beta, double mu, std::span<const cplx> rhs,
                         std::span<cplx> out) {
    if (!(mu > 0.0))
        throw InvalidArgument("per_frequency_solve: mu must be positive");
    if (alpha < 0.0 || beta < 0.0)
        throw InvalidArgument("per_frequency_solve: alpha and beta must be >= 0");
    const std::size_t C = a.size();
    if (b.size() != C || rhs.size() != C || out.size() != C)
        throw InvalidArgument("per_frequency_solve: channel count mismatch");

    // M = mu I + W W^H with W = [sqrt(alpha) a, sqrt(beta) b]. Woodbury:
    // M^{-1} v = (v - W (mu I2 + W^H W)^{-1} W^H v) / mu.
    const double sa = std::sqrt(alpha), sb = std::sqrt(beta);
    double g11 = 0.0, g22 = 0.0;
    cplx g12(0.0, 0.0), h1(0.0, 0.0), h2(0.0, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        const cplx wa = sa * a[c];
        const cplx wb = sb * b[c];
        g11 += std::norm(wa);
        g22 += std::norm(wb);
        g12 += std::conj(wa) * wb;
        h1 += std::conj(wa) * rhs[c];
        h2 += std::conj(wb) * rhs[c];
    }
    const double m11 = mu + g11;
    const double m22 = mu + g22;
    // det >= mu^2 by Cauchy-Schwarz, so the 2x2 system is always regular.
    const double det = m11 * m22 - std::norm(g12);
    const cplx t1 = (m22 * h1 - g12 * h2) / det;
    const cplx t2 = (m11 * h2 - std::conj(g12) * h1) / det;
    for (std::size_t c = 0; c < C; ++c)
        out[c] = (rhs[c] - sa * a[c] * t1 - sb * b[c] * t2) / mu;
}

void per_frequency_solve_dense(std::span<const cplx> a, std::span<const cplx> b, double alpha,
                               double beta, double mu, std::span<const cplx> rhs,
                               std::span<cplx> out) {
    if (!(mu > 0.0))
        throw InvalidArgument("per_frequency_solve_dense: mu must be positive");
    const auto C = static_cast<Eigen::Index>(a.size());
    if (b.size() != a.size() || rhs.size() != a.size() || out.size() != a.size())
        throw InvalidArgument("per_frequency_solve_dense: channel count mismatch");

    Eigen::VectorXcd av(C), bv(C), rv(C);
    for (Eigen::Index c = 0; c < C; ++c) {
        av(c) = a[c];
        bv(c) = b[c];
        rv(c) = rhs[c];
    }
    Eigen::MatrixXcd M = mu * Eigen::MatrixXcd::Identity(C, C);
    M.noalias() += alpha * (av * av.adjoint());
    M.noalias() += beta * (bv * bv.adjoint());
    Eigen::VectorXcd x = M.llt().solve(rv);
    for (Eigen::Index c = 0; c < C; ++c)
        out[c] = x(c);
}

void solve_all_bins(const Spectrum& a, const Spectrum& b, double alpha, double beta, double mu,
                    const Spectrum& rhs, Spectrum& out, SolveKernel kernel, Exec exec) {
    if (!a.same_shape(b) || !a.same_shape(rhs))
        throw InvalidArgument("solve_all_bins: dimension mismatch");
    if (!out.same_shape(a))
        out = Spectrum(a.rows(), a.cols(), a.channels());
    const auto n = static_cast<std::int64_t>(a.plane_size());
    const int C = a.channels();
    parallel_for(n, exec, [&](std::int64_t bin) {
        thread_local std::vector<cplx> av, bv, rv, ov;
        av.resize(C);
        bv.resize(C);
        rv.resize(C);
        ov.resize(C);
        for (int c = 0; c < C; ++c) {
            av[c] = a.plane(c)[bin];
            bv[c] = b.plane(c)[bin];
            rv[c] = rhs.plane(c)[bin];
        }
        if (kernel == SolveKernel::Woodbury)
            per_frequency_solve(av, bv, alpha, beta, mu, rv, ov);
        else
            per_frequency_solve_dense(av, bv, alpha, beta, mu, rv, ov);
        for (int c = 0; c < C; ++c)
            out.plane(c)[bin] = ov[c];
    });
}

} // namespace cotrack
