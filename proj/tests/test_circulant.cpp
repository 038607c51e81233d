#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "cotrack/errors.hpp"
#include "cotrack/solver.hpp"
#include "cotrack/spectrum.hpp"
#include "test_helpers.hpp"

using namespace cotrack;
using testutil::brute_force_correlation;
using testutil::random_tensor;

TEST_CASE("spectrum of a unit impulse is flat ones") {
    Tensor t(4, 4, 1);
    t.at(0, 0) = 1.0;
    const Spectrum s = forward_spectrum(t);
    for (const auto& z : s.data()) {
        CHECK(z.real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(z.imag() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("spectrum of a constant grid concentrates at DC") {
    Tensor t(3, 5, 1);
    for (auto& v : t.data())
        v = 2.5;
    const Spectrum s = forward_spectrum(t);
    CHECK(s.at(0, 0).real() == doctest::Approx(2.5 * 15).epsilon(1e-12));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 5; ++c)
            if (r != 0 || c != 0)
                CHECK(std::abs(s.at(r, c)) < 1e-9);
}

TEST_CASE("forward/inverse round trip and Parseval") {
    std::mt19937_64 rng(42);
    const Tensor t = random_tensor(rng, 8, 8, 3);
    const Spectrum s = forward_spectrum(t);
    const Tensor back = inverse_spectrum(s);
    double grid_sq = 0.0, spec_sq = 0.0, max_err = 0.0;
    for (std::size_t i = 0; i < t.data().size(); ++i) {
        max_err = std::max(max_err, std::abs(t.data()[i] - back.data()[i]));
        grid_sq += t.data()[i] * t.data()[i];
    }
    for (const auto& z : s.data())
        spec_sq += std::norm(z);
    CHECK(max_err < 1e-9);
    CHECK(grid_sq == doctest::Approx(spec_sq / 64.0).epsilon(1e-6));
}

TEST_CASE("all-ones spectrum inverts to a unit impulse") {
    Spectrum s(4, 4, 1);
    for (auto& z : s.data())
        z = cplx(1.0, 0.0);
    const Tensor t = inverse_spectrum(s);
    CHECK(t.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(t.at(1, 2)) < 1e-12);
}

TEST_CASE("inverse_spectrum rejects a non-real computation") {
    Spectrum s(4, 4, 1);
    for (auto& z : s.data())
        z = cplx(1.0, 0.0);
    // A large imaginary DC component cannot come from a real grid.
    s.at(0, 0) = cplx(1.0, 50.0);
    CHECK_THROWS_AS(inverse_spectrum(s), NumericalError);
}

TEST_CASE("self-correlation of a delta peaks at zero shift") {
    Tensor t(5, 5, 1);
    t.at(0, 0) = 1.0;
    const Spectrum s = forward_spectrum(t);
    const ResponseMap r = correlation_response(s, s);
    CHECK(r.peak_row == 0);
    CHECK(r.peak_col == 0);
    CHECK(r.peak_value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlating with a shifted copy locates the shift") {
    std::mt19937_64 rng(7);
    const Tensor tpl = random_tensor(rng, 8, 8, 1);
    Tensor flt(8, 8, 1);
    // filter = template cyclically shifted by (2, 3)
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
            flt.at(r, c) = tpl.at((r - 2 + 8) % 8, (c - 3 + 8) % 8);
    const ResponseMap resp = correlation_response(forward_spectrum(tpl), forward_spectrum(flt));
    CHECK(resp.peak_row == 2);
    CHECK(resp.peak_col == 3);

    // and the whole map matches the spatial-domain oracle
    const Tensor oracle = brute_force_correlation(tpl, flt);
    for (std::size_t i = 0; i < oracle.data().size(); ++i)
        CHECK(resp.values.data()[i] == doctest::Approx(oracle.data()[i]).epsilon(1e-9));
}

TEST_CASE("spectral correlation matches brute force on random multi-channel grids") {
    std::mt19937_64 rng(99);
    for (const auto [rows, cols, ch] : {std::array<int, 3>{16, 16, 2},
                                        std::array<int, 3>{5, 9, 3},
                                        std::array<int, 3>{1, 12, 1}}) {
        const Tensor tpl = random_tensor(rng, rows, cols, ch);
        const Tensor flt = random_tensor(rng, rows, cols, ch);
        const ResponseMap resp =
            correlation_response(forward_spectrum(tpl), forward_spectrum(flt));
        const Tensor oracle = brute_force_correlation(tpl, flt);
        for (std::size_t i = 0; i < oracle.data().size(); ++i)
            CHECK(std::abs(resp.values.data()[i] - oracle.data()[i]) < 1e-6);
    }
}

TEST_CASE("correlation over channels is additive") {
    std::mt19937_64 rng(3);
    const Tensor tpl = random_tensor(rng, 6, 6, 2);
    const Tensor flt = random_tensor(rng, 6, 6, 2);
    Tensor tpl0(6, 6, 1), tpl1(6, 6, 1), flt0(6, 6, 1), flt1(6, 6, 1);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
            tpl0.at(r, c) = tpl.at(r, c, 0);
            tpl1.at(r, c) = tpl.at(r, c, 1);
            flt0.at(r, c) = flt.at(r, c, 0);
            flt1.at(r, c) = flt.at(r, c, 1);
        }
    const ResponseMap both = correlation_response(forward_spectrum(tpl), forward_spectrum(flt));
    const ResponseMap a = correlation_response(forward_spectrum(tpl0), forward_spectrum(flt0));
    const ResponseMap b = correlation_response(forward_spectrum(tpl1), forward_spectrum(flt1));
    for (std::size_t i = 0; i < both.values.data().size(); ++i)
        CHECK(both.values.data()[i] ==
              doctest::Approx(a.values.data()[i] + b.values.data()[i]).epsilon(1e-9));
}

TEST_CASE("correlation_response rejects mismatched shapes") {
    Tensor a(4, 4, 1), b(4, 4, 2);
    CHECK_THROWS_AS(correlation_response(forward_spectrum(a), forward_spectrum(b)),
                    InvalidArgument);
}

TEST_CASE("response peak tie-breaking picks the smallest row then column") {
    Tensor flat(3, 3, 1);
    for (auto& v : flat.data())
        v = 1.0;
    const ResponseMap r = make_response_map(flat);
    CHECK(r.peak_row == 0);
    CHECK(r.peak_col == 0);
}

namespace {

std::vector<cplx> random_cvec(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& z : v)
        z = cplx(dist(rng), dist(rng));
    return v;
}

} // namespace

TEST_CASE("per_frequency_solve with alpha = beta = 0 divides by mu") {
    std::mt19937_64 rng(1);
    const auto a = random_cvec(rng, 3), b = random_cvec(rng, 3), rhs = random_cvec(rng, 3);
    std::vector<cplx> out(3);
    per_frequency_solve(a, b, 0.0, 0.0, 2.0, rhs, out);
    for (int c = 0; c < 3; ++c)
        CHECK(std::abs(out[c] - rhs[c] / 2.0) < 1e-12);
}

TEST_CASE("per_frequency_solve scalar example") {
    const std::vector<cplx> a{cplx(1, 0)}, b{cplx(0, 0)}, rhs{cplx(3, 0)};
    std::vector<cplx> out(1);
    per_frequency_solve(a, b, 2.0, 0.0, 1.0, rhs, out);
    CHECK(out[0].real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(out[0].imag()) < 1e-12);
}

TEST_CASE("woodbury solve matches the dense solve and satisfies the system") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t C = 4;
        const auto a = random_cvec(rng, C), b = random_cvec(rng, C), rhs = random_cvec(rng, C);
        const double alpha = trial % 3 == 0 ? 0.0 : 1.7;
        const double beta = trial % 4 == 0 ? 0.0 : 0.6;
        const double mu = 0.3;
        std::vector<cplx> fast(C), dense(C);
        per_frequency_solve(a, b, alpha, beta, mu, rhs, fast);
        per_frequency_solve_dense(a, b, alpha, beta, mu, rhs, dense);
        double diff = 0.0, den = 0.0, resid = 0.0, rn = 0.0;
        for (std::size_t i = 0; i < C; ++i) {
            diff += std::norm(fast[i] - dense[i]);
            den += std::norm(dense[i]);
        }
        CHECK(std::sqrt(diff / den) < 1e-10);
        // residual check: (alpha a a^H + beta b b^H + mu I) x = rhs
        for (std::size_t i = 0; i < C; ++i) {
            cplx ax(0, 0), bx(0, 0);
            for (std::size_t j = 0; j < C; ++j) {
                ax += std::conj(a[j]) * fast[j];
                bx += std::conj(b[j]) * fast[j];
            }
            const cplx lhs = alpha * a[i] * ax + beta * b[i] * bx + mu * fast[i];
            resid += std::norm(lhs - rhs[i]);
            rn += std::norm(rhs[i]);
        }
        CHECK(std::sqrt(resid) <= 1e-8 * std::sqrt(rn));
    }
}

TEST_CASE("per_frequency_solve rejects non-positive mu") {
    const std::vector<cplx> a{cplx(1, 0)}, rhs{cplx(1, 0)};
    std::vector<cplx> out(1);
    CHECK_THROWS_AS(per_frequency_solve(a, a, 1.0, 1.0, 0.0, rhs, out), InvalidArgument);
    CHECK_THROWS_AS(per_frequency_solve(a, a, 1.0, 1.0, -1.0, rhs, out), InvalidArgument);
}

TEST_CASE("solve_all_bins is bit-identical under both execution policies") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int rows = 6, cols = 7, C = 3;
    Spectrum a(rows, cols, C), b(rows, cols, C), rhs(rows, cols, C);
    for (auto* s : {&a, &b, &rhs})
        for (auto& z : s->data())
            z = cplx(dist(rng), dist(rng));
    Spectrum serial, parallel;
    solve_all_bins(a, b, 2.0, 0.8, 0.4, rhs, serial, SolveKernel::Woodbury, Exec::Serial);
    solve_all_bins(a, b, 2.0, 0.8, 0.4, rhs, parallel, SolveKernel::Woodbury, Exec::Parallel);
    for (std::size_t i = 0; i < serial.data().size(); ++i) {
        CHECK(serial.data()[i].real() == parallel.data()[i].real());
        CHECK(serial.data()[i].imag() == parallel.data()[i].imag());
    }
}

TEST_CASE("transforms are bit-identical under both execution policies") {
    std::mt19937_64 rng(29);
    const Tensor t = random_tensor(rng, 9, 11, 4);
    const Spectrum fs = forward_spectrum(t, Exec::Serial);
    const Spectrum fp = forward_spectrum(t, Exec::Parallel);
    for (std::size_t i = 0; i < fs.data().size(); ++i)
        CHECK(fs.data()[i] == fp.data()[i]);
    const Tensor is = inverse_spectrum(fs, Exec::Serial);
    const Tensor ip = inverse_spectrum(fs, Exec::Parallel);
    for (std::size_t i = 0; i < is.data().size(); ++i)
        CHECK(is.data()[i] == ip.data()[i]);
}

TEST_CASE("per-frequency Gram structure matches the materialized circulant blocks") {
    std::mt19937_64 rng(23);
    for (const auto [rows, cols, ch] : {std::array<int, 3>{2, 4, 2}, std::array<int, 3>{8, 1, 1},
                                        std::array<int, 3>{4, 2, 2}}) {
        const Tensor tpl = random_tensor(rng, rows, cols, ch);
        const Eigen::MatrixXd Phi = circulant_design_matrix(tpl);
        const Eigen::MatrixXd G = Phi.transpose() * Phi;
        const Tensor v = random_tensor(rng, rows, cols, ch);
        Eigen::VectorXd vv(static_cast<Eigen::Index>(v.size()));
        for (Eigen::Index i = 0; i < vv.size(); ++i)
            vv(i) = v.data()[i];
        const Eigen::VectorXd dense_out = G * vv;

        // Spectral route: per frequency the Gram acts as the rank-one outer
        // product of the channel spectrum vector.
        const Spectrum a = forward_spectrum(tpl);
        const Spectrum vhat = forward_spectrum(v);
        Spectrum out(rows, cols, ch);
        for (std::size_t bin = 0; bin < a.plane_size(); ++bin) {
            cplx dot(0, 0);
            for (int c = 0; c < ch; ++c)
                dot += std::conj(a.plane(c)[bin]) * vhat.plane(c)[bin];
            for (int c = 0; c < ch; ++c)
                out.plane(c)[bin] = a.plane(c)[bin] * dot;
        }
        const Tensor spectral_out = inverse_spectrum(out);
        for (std::size_t i = 0; i < spectral_out.data().size(); ++i)
            CHECK(std::abs(spectral_out.data()[i] - dense_out(static_cast<Eigen::Index>(i))) <
                  1e-8);
    }
}
