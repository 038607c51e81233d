#pragma once

#include <cassert>
#include <complex>
#include <span>
#include <vector>

#include "cotrack/config.hpp"
#include "cotrack/parallel.hpp"
#include "cotrack/tensor.hpp"

namespace cotrack {

using cplx = std::complex<double>;

// Per-channel 2-D discrete Fourier transform of a real tensor, channel-planar
// like Tensor. All circulant algebra happens on these coefficients.
class Spectrum {
public:
    Spectrum() = default;
    Spectrum(int rows, int cols, int channels)
        : rows_(rows), cols_(cols), channels_(channels),
          v_(static_cast<std::size_t>(rows) * cols * channels) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int channels() const { return channels_; }
    std::size_t plane_size() const { return static_cast<std::size_t>(rows_) * cols_; }
    std::size_t size() const { return v_.size(); }

    cplx& at(int r, int c, int ch = 0) {
        return v_[plane_size() * ch + static_cast<std::size_t>(r) * cols_ + c];
    }
    cplx at(int r, int c, int ch = 0) const {
        return v_[plane_size() * ch + static_cast<std::size_t>(r) * cols_ + c];
    }

    std::span<cplx> plane(int ch) { return {v_.data() + plane_size() * ch, plane_size()}; }
    std::span<const cplx> plane(int ch) const {
        return {v_.data() + plane_size() * ch, plane_size()};
    }

    std::vector<cplx>& data() { return v_; }
    const std::vector<cplx>& data() const { return v_; }

    bool same_shape(const Spectrum& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && channels_ == o.channels_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    int channels_ = 0;
    std::vector<cplx> v_;
};

// Detection output: a real response grid plus the located maximum. Ties are
// broken toward the smallest row, then the smallest column.
struct ResponseMap {
    Tensor values; // rows x cols x 1
    int peak_row = 0;
    int peak_col = 0;
    double peak_value = 0.0;
};

// Unnormalized forward transform per channel.
Spectrum forward_spectrum(const Tensor& grid, Exec exec = Exec::Parallel);

// Normalized inverse transform, returning the real part. An imaginary residue
// above 1e-6 relative signals an inconsistent spectral computation and throws
// NumericalError.
Tensor inverse_spectrum(const Spectrum& s, Exec exec = Exec::Parallel);

// r = inverse( sum_c conj(template_c) * filter_c ). Value at shift d equals
// the inner product between the d-shifted template and the filter, i.e. the
// circulant product over all cyclic shifts.
ResponseMap correlation_response(const Spectrum& template_spec, const Spectrum& filter_spec,
                                 Exec exec = Exec::Parallel);

// Locates the maximum of a real 1-channel grid (row-major scan, strict >).
ResponseMap make_response_map(Tensor values);

// Solves (alpha a a^H + beta b b^H + mu I) x = rhs for one frequency bin via
// the rank-2 Woodbury identity (a 2x2 inner solve), O(C) per bin.
void per_frequency_solve(std::span<const cplx> a, std::span<const cplx> b, double alpha,
                         double beta, double mu, std::span<const cplx> rhs,
                         std::span<cplx> out);

// Same system solved by materializing the dense C x C matrix (Eigen LLT).
// Verification fallback; the solve_all_bins kernel flag selects it.
void per_frequency_solve_dense(std::span<const cplx> a, std::span<const cplx> b, double alpha,
                               double beta, double mu, std::span<const cplx> rhs,
                               std::span<cplx> out);

// Runs the per-frequency solve over every bin of the grid. Bins are
// independent, so execution may be data-parallel; results are bit-identical
// for both policies.
void solve_all_bins(const Spectrum& a, const Spectrum& b, double alpha, double beta, double mu,
                    const Spectrum& rhs, Spectrum& out, SolveKernel kernel,
                    Exec exec = Exec::Parallel);

} // namespace cotrack
