#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "prforge/fourier.hpp"
#include "prforge/png_io.hpp"

using namespace prforge;
using Catch::Approx;

namespace {

double max_abs_diff(const ImageReal& a, const ImageReal& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("apply: zero image and Parseval", "[fourier]") {
    const FourierOp op(16, 16);
    const auto zero = op.apply(ImageReal(16, 16));
    for (const auto& v : zero.data) CHECK(v == Complex(0, 0));

    const ImageReal x = oracle::random_image(16, 16, 11);
    const auto f = op.apply(x);
    double e = 0;
    for (const auto& v : f.data) e += std::norm(v);
    CHECK(std::sqrt(e) / std::sqrt(squared_norm(x)) == Approx(1.0).margin(1e-10));
}

TEST_CASE("apply and pseudoinverse agree with the dense matrix on 4x4", "[fourier][oracle]") {
    const FourierOp op(4, 4);
    const oracle::DenseOperator dense(4, 4);
    const ImageReal x = oracle::random_image(4, 4, 5);
    const auto fast = op.apply(x);
    const auto slow = dense.apply(x);
    for (std::size_t i = 0; i < slow.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-10);

    // adjoint identity <Ax, f> = <x, A-dagger f>, real inner products
    Rng rng(9);
    ComplexField f(8, 8);
    std::vector<oracle::cd> fv(64);
    for (std::size_t i = 0; i < 64; ++i) {
        f[i] = {rng.normal(), rng.normal()};
        fv[i] = f[i];
    }
    const ImageReal back = op.pseudoinverse(f);
    CHECK(max_abs_diff(back, dense.adjoint_real(fv)) < 1e-10);
    double lhs = 0;
    for (std::size_t i = 0; i < 64; ++i) lhs += (std::conj(fast[i]) * f[i]).real();
    CHECK(lhs == Approx(dot(x, back)).margin(1e-10));
}

TEST_CASE("pseudoinverse inverts apply", "[fourier]") {
    for (std::size_t n : {3, 8, 16}) {
        const FourierOp op(n, n + 1);
        const ImageReal x = oracle::random_image(n, n + 1, n);
        CHECK(max_abs_diff(op.pseudoinverse(op.apply(x)), x) < 1e-10);
    }
    const FourierOp op(4, 4);
    CHECK(op.pseudoinverse(ComplexField(8, 8)) == ImageReal(4, 4));
    CHECK_THROWS_AS(op.pseudoinverse(ComplexField(6, 8)), DimensionError);
    CHECK_THROWS_AS(op.apply(ImageReal(4, 5)), DimensionError);
}

TEST_CASE("horizontal flip permutes the magnitude grid (direct DFT oracle)", "[fourier][oracle]") {
    const ImageReal x = oracle::random_image(4, 4, 21);
    const ImageReal flipped = apply_d4(x, D4Transform::HF);
    const auto m = oracle::direct_magnitudes(x);
    const auto mf = oracle::direct_magnitudes(flipped);
    // |X'(kr, kc)| = |X(kr, -kc mod 8)|
    for (std::size_t kr = 0; kr < 8; ++kr)
        for (std::size_t kc = 0; kc < 8; ++kc) CHECK(mf[kr * 8 + kc] == Approx(m[kr * 8 + (8 - kc) % 8]).margin(1e-10));
    const FourierOp op(4, 4);
    const auto fast = op.magnitudes(flipped);
    for (std::size_t i = 0; i < 64; ++i) CHECK(fast[i] == Approx(mf[i]).margin(1e-10));
}

TEST_CASE("frequency-grid permutation realises every D4 element", "[fourier][d4]") {
    for (std::size_t n : {4, 16}) {
        const FourierOp op(n, n);
        const ImageReal x = oracle::random_image(n, n, 77 + n);
        const auto base = op.magnitudes(x);
        for (D4Transform t : kD4Elements) {
            const auto expected = op.magnitudes(apply_d4(x, t));
            const auto permuted = permute_frequency_grid<double>(base, 2 * n, 2 * n, t);
            double err = 0;
            for (std::size_t i = 0; i < base.size(); ++i) err = std::max(err, std::abs(expected[i] - permuted[i]));
            CHECK(err < 1e-10);
        }
    }
    const std::vector<double> v(24);
    CHECK_THROWS_AS(permute_frequency_grid<double>(v, 4, 6, D4Transform::R90), DimensionError);
}

TEST_CASE("simulate", "[fourier][noise]") {
    const FourierOp op(8, 8);
    const ImageReal x = oracle::random_image(8, 8, 2);
    const auto clean = simulate(op, x, 0.0, Seed{4});
    const auto field = op.apply(x);
    for (std::size_t i = 0; i < field.size(); ++i) {
        CHECK(clean.magnitudes[i] == std::abs(field[i]));
        CHECK(clean.intensities[i] == std::norm(field[i]));
    }
    const auto a = simulate(op, x, 3.0, Seed{99});
    const auto b = simulate(op, x, 3.0, Seed{99});
    CHECK(a == b);
    CHECK(a.seed == Seed{99});
    for (std::size_t i = 0; i < a.magnitudes.size(); ++i) {
        CHECK(a.magnitudes[i] >= 0.0);
        CHECK(a.magnitudes[i] == std::sqrt(std::max(a.intensities[i], 0.0)));
    }
    CHECK_THROWS(simulate(op, x, -1.0, Seed{1}));
}

TEST_CASE("simulated noise variance tracks alpha^2 |Ax|^2", "[fourier][noise][statistics]") {
    const FourierOp op(4, 4);
    const ImageReal x = oracle::random_image(4, 4, 8);
    const auto mags = op.magnitudes(x);
    const double alpha = 3.0;
    const int draws = 20000;
    std::vector<double> s1(mags.size()), s2(mags.size());
    Rng rng(1234);
    for (int d = 0; d < draws; ++d) {
        const auto m = simulate(op, x, alpha, rng);
        for (std::size_t i = 0; i < mags.size(); ++i) {
            const double w = m.intensities[i] - mags[i] * mags[i];
            s1[i] += w;
            s2[i] += w * w;
        }
    }
    for (std::size_t i = 0; i < mags.size(); ++i) {
        if (mags[i] < 1e-9) continue;
        const double mean = s1[i] / draws;
        const double var = (s2[i] - draws * mean * mean) / (draws - 1);
        CHECK(var / (alpha * alpha * mags[i] * mags[i]) == Approx(1.0).margin(0.1));
    }
}

TEST_CASE("snr_db", "[fourier][snr]") {
    const FourierOp op(8, 8);
    const ImageReal x = oracle::random_image(8, 8, 3);
    CHECK(snr_db(op, x, simulate(op, x, 0.0, Seed{1})) == std::numeric_limits<double>::infinity());

    // scaling the operator by c scales both norms by c
    ImageReal scaled = x;
    for (auto& v : scaled.pixels()) v *= 7.5;
    const double s1 = snr_db(op, x, simulate(op, x, 3.0, Seed{5}));
    const double s2 = snr_db(op, scaled, simulate(op, scaled, 3.0, Seed{5}));
    CHECK(s1 == Approx(s2).margin(1e-9));
}

TEST_CASE("snr_db matches a from-definition recomputation on a 256x256 image", "[fourier][snr][oracle]") {
    const ImageReal img = read_png(PRFORGE_TEST_DATA "/camera256.png");
    const FourierOp op(img.height(), img.width());
    const auto meas = simulate(op, img, 3.0, Seed{2024});
    const auto f = oracle::separable_dft_padded(img);
    double signal = 0, noise = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        signal += std::norm(f[i]);
        const double d = meas.intensities[i] - std::norm(f[i]);
        noise += d * d;
    }
    const double expected = 10.0 * std::log10(std::sqrt(signal) / std::sqrt(noise));
    CHECK(snr_db(op, img, meas) == Approx(expected).margin(1e-9));
}

TEST_CASE("residual", "[fourier][residual]") {
    const FourierOp op(4, 4);
    const ImageReal x = oracle::random_image(4, 4, 12);
    const auto meas = simulate(op, x, 0.0, Seed{0});
    double ynorm = 0;
    for (double v : meas.magnitudes) ynorm += v * v;
    CHECK(residual(op, x, meas) <= 1e-18 * ynorm);
    CHECK(residual(op, ImageReal(4, 4), meas) == Approx(ynorm).epsilon(1e-14));

    // conjugate flip within the support leaves the residual unchanged
    const auto noisy = simulate(op, x, 2.0, Seed{3});
    const ImageReal other = oracle::random_image(4, 4, 13);
    const auto direct = oracle::direct_magnitudes(apply_d4(other, D4Transform::R180));
    const auto direct0 = oracle::direct_magnitudes(other);
    for (std::size_t i = 0; i < direct.size(); ++i) CHECK(direct[i] == Approx(direct0[i]).margin(1e-10));
    CHECK(residual(op, apply_d4(other, D4Transform::R180), noisy) ==
          Approx(residual(op, other, noisy)).epsilon(1e-10));
}

TEST_CASE("magnitude loss subgradient matches central differences", "[fourier][gradient]") {
    const FourierOp op(4, 4);
    Rng rng(55);
    int checked = 0;
    for (Seed s = 0; checked < 10; ++s) {
        const ImageReal x = oracle::random_image(4, 4, 300 + s, -5, 5);
        const auto mags = op.magnitudes(x);
        if (*std::min_element(mags.begin(), mags.end()) <= 0.1) continue;
        std::vector<double> y(mags.size());
        for (auto& v : y) v = 5.0 * rng.uniform();
        const ImageReal g = magnitude_loss_gradient(op, x, y);
        const double h = 1e-5;
        for (std::size_t j = 0; j < x.size(); ++j) {
            ImageReal xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const double fd = (residual(op, xp, y) - residual(op, xm, y)) / (2 * h);
            CHECK(fd == Approx(g[j]).epsilon(1e-5).margin(1e-6));
        }
        ++checked;
    }
}
