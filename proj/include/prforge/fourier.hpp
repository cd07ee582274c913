#pragma once

// Oversampled unitary Fourier measurement operator, the simulated noisy
// intensity model, and measurement-domain utilities.
//
// The operator maps an H x W real image to the 2-D DFT of its zero padding
// into a 2H x 2W grid (support in the top-left block), scaled by
// 1/sqrt(4HW). With this scaling the operator has orthonormal columns and its
// pseudoinverse is the adjoint: inverse DFT, real part, crop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "prforge/errors.hpp"
#include "prforge/fft.hpp"
#include "prforge/image.hpp"
#include "prforge/rng.hpp"

namespace prforge {

using fft::Complex;

/// Row-major complex array on the oversampled grid.
struct ComplexField {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<Complex> data;

    ComplexField() = default;
    ComplexField(std::size_t h, std::size_t w) : height(h), width(w), data(h * w) {}

    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
    Complex& operator[](std::size_t i) noexcept { return data[i]; }
    const Complex& operator[](std::size_t i) const noexcept { return data[i]; }
};

inline std::vector<double> abs(const ComplexField& f) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::abs(f[i]);
    return out;
}

/// Unit phase of a field; bins with zero modulus get phase 1.
inline ComplexField phase(const ComplexField& f) {
    ComplexField out(f.height, f.width);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double m = std::abs(f[i]);
        out[i] = m > 0.0 ? f[i] / m : Complex(1.0, 0.0);
    }
    return out;
}

class FourierOp {
public:
    FourierOp(std::size_t inner_h, std::size_t inner_w) : inner_h_(inner_h), inner_w_(inner_w) {
        if (inner_h == 0 || inner_w == 0) throw DimensionError("FourierOp: empty image dimensions");
        scale_ = 1.0 / std::sqrt(static_cast<double>(outer_h() * outer_w()));
    }

    [[nodiscard]] std::size_t inner_h() const noexcept { return inner_h_; }
    [[nodiscard]] std::size_t inner_w() const noexcept { return inner_w_; }
    [[nodiscard]] std::size_t outer_h() const noexcept { return 2 * inner_h_; }
    [[nodiscard]] std::size_t outer_w() const noexcept { return 2 * inner_w_; }
    [[nodiscard]] std::size_t measurement_size() const noexcept { return outer_h() * outer_w(); }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] SupportMask support() const { return SupportMask::compact(inner_h_, inner_w_); }

    /// Unitary DFT of a real array already living on the 2H x 2W grid.
    [[nodiscard]] ComplexField forward_grid(const ImageReal& grid) const {
        check_grid(grid.height(), grid.width(), "forward_grid");
        std::vector<Complex> in(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) in[i] = Complex(grid[i], 0.0);
        ComplexField out(outer_h(), outer_w());
        fft::transform(in.data(), out.data.data(), outer_h(), outer_w(), fft::Direction::forward);
        for (auto& v : out.data) v *= scale_;
        return out;
    }

    /// Real part of the unitary inverse DFT, kept on the full grid.
    [[nodiscard]] ImageReal inverse_grid(const ComplexField& field) const {
        check_grid(field.height, field.width, "inverse_grid");
        std::vector<Complex> out(field.size());
        fft::transform(field.data.data(), out.data(), outer_h(), outer_w(), fft::Direction::backward);
        ImageReal grid(outer_h(), outer_w());
        for (std::size_t i = 0; i < out.size(); ++i) grid[i] = out[i].real() * scale_;
        return grid;
    }

    /// A x: unitary DFT of the zero-padded image.
    [[nodiscard]] ComplexField apply(const ImageReal& img) const {
        check_inner(img, "apply");
        return forward_grid(pad_to_grid(img));
    }

    /// A-dagger: real part of the unitary inverse DFT, cropped to the support.
    [[nodiscard]] ImageReal pseudoinverse(const ComplexField& field) const {
        return crop_support(inverse_grid(field), inner_h_, inner_w_);
    }

    [[nodiscard]] std::vector<double> magnitudes(const ImageReal& img) const { return abs(apply(img)); }

    void check_inner(const ImageReal& img, const char* where) const {
        if (img.height() != inner_h_ || img.width() != inner_w_) {
            throw DimensionError(std::string(where) + ": image " + std::to_string(img.height()) + "x" +
                                 std::to_string(img.width()) + " does not match operator " +
                                 std::to_string(inner_h_) + "x" + std::to_string(inner_w_));
        }
    }

    void check_grid(std::size_t h, std::size_t w, const char* where) const {
        if (h != outer_h() || w != outer_w()) {
            throw DimensionError(std::string(where) + ": grid " + std::to_string(h) + "x" + std::to_string(w) +
                                 " does not match operator grid " + std::to_string(outer_h()) + "x" +
                                 std::to_string(outer_w()));
        }
    }

    void check_measurement_size(std::size_t n, const char* where) const {
        if (n != measurement_size()) {
            throw DimensionError(std::string(where) + ": measurement length " + std::to_string(n) +
                                 " does not match operator grid size " + std::to_string(measurement_size()));
        }
    }

private:
    std::size_t inner_h_;
    std::size_t inner_w_;
    double scale_ = 1.0;
};

/// Noisy intensities y^2 together with the derived magnitudes y.
struct Measurement {
    std::size_t height = 0;  ///< image height H (grid is 2H x 2W)
    std::size_t width = 0;
    double alpha = 0.0;
    std::optional<Seed> seed;
    std::vector<double> intensities;
    std::vector<double> magnitudes;

    [[nodiscard]] std::size_t grid_h() const noexcept { return 2 * height; }
    [[nodiscard]] std::size_t grid_w() const noexcept { return 2 * width; }

    /// magnitudes = sqrt(max(intensities, 0)).
    static Measurement from_intensities(std::size_t h, std::size_t w, double alpha, std::vector<double> intensities,
                                        std::optional<Seed> seed = std::nullopt) {
        if (intensities.size() != 4 * h * w) throw DimensionError("measurement: intensity length mismatch");
        Measurement m{h, w, alpha, seed, std::move(intensities), {}};
        m.magnitudes.resize(m.intensities.size());
        for (std::size_t i = 0; i < m.intensities.size(); ++i)
            m.magnitudes[i] = std::sqrt(std::max(m.intensities[i], 0.0));
        return m;
    }

    friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Draws y^2 = |Ax|^2 + w with w_i ~ Normal(0, alpha^2 |Ax|_i^2), one normal
/// per grid bin in row-major order.
template <typename NormalSource>
Measurement simulate(const FourierOp& op, const ImageReal& img, double alpha, NormalSource& rng,
                     std::optional<Seed> seed = std::nullopt) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("simulate: alpha must be non-negative");
    const auto field = op.apply(img);
    const auto mags = abs(field);
    std::vector<double> intensities(mags.size());
    for (std::size_t i = 0; i < mags.size(); ++i) {
        const double noise = alpha * mags[i] * rng.normal();
        intensities[i] = std::norm(field[i]) + noise;
    }
    auto m = Measurement::from_intensities(img.height(), img.width(), alpha, std::move(intensities), seed);
    if (alpha == 0.0) m.magnitudes = mags;  // exact, no sqrt round trip
    return m;
}

inline Measurement simulate(const FourierOp& op, const ImageReal& img, double alpha, Seed seed) {
    Rng rng(seed);
    return simulate(op, img, alpha, rng, seed);
}

/// ||y - |Ax|||^2 against arbitrary magnitudes.
inline double residual(const FourierOp& op, const ImageReal& img, std::span<const double> magnitudes) {
    op.check_measurement_size(magnitudes.size(), "residual");
    const auto field = op.apply(img);
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double d = magnitudes[i] - std::abs(field[i]);
        s += d * d;
    }
    return s;
}

inline double residual(const FourierOp& op, const ImageReal& img, const Measurement& meas) {
    return residual(op, img, meas.magnitudes);
}

/// 10 log10(||Fx|| / ||y^2 - |Fx|^2||); +infinity for a noiseless measurement.
inline double snr_db(const FourierOp& op, const ImageReal& img, const Measurement& meas) {
    op.check_measurement_size(meas.intensities.size(), "snr_db");
    const auto field = op.apply(img);
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double p = std::norm(field[i]);
        signal += p;
        const double d = meas.intensities[i] - p;
        noise += d * d;
    }
    if (noise == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(std::sqrt(signal) / std::sqrt(noise));
}

/// Subgradient of ||y - |Ax|||^2 with respect to x: 2 (x - A-dagger(phase(Ax) y)).
inline ImageReal magnitude_loss_gradient(const FourierOp& op, const ImageReal& img, std::span<const double> magnitudes) {
    op.check_measurement_size(magnitudes.size(), "magnitude_loss_gradient");
    auto ph = phase(op.apply(img));
    for (std::size_t i = 0; i < ph.size(); ++i) ph[i] *= magnitudes[i];
    const auto back = op.pseudoinverse(ph);
    ImageReal g(img.height(), img.width());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * (img[i] - back[i]);
    return g;
}

/// Index permutation P_t on the 2H x 2W frequency grid with
/// |A(t x)| = P_t(|A x|): out[k] = in[S k mod N], S the element's source matrix
/// acting on frequency indices centred at zero.
template <typename T>
std::vector<T> permute_frequency_grid(std::span<const T> values, std::size_t grid_h, std::size_t grid_w,
                                      D4Transform t) {
    if (values.size() != grid_h * grid_w) throw DimensionError("permute_frequency_grid: length mismatch");
    if (swaps_axes(t) && grid_h != grid_w) {
        throw DimensionError("permute_frequency_grid: " + std::string(to_string(t)) + " requires a square grid");
    }
    const D4Matrix s = source_matrix(t);
    const auto gh = static_cast<long long>(grid_h);
    const auto gw = static_cast<long long>(grid_w);
    auto wrap = [](long long v, long long n) { return ((v % n) + n) % n; };
    std::vector<T> out(values.size());
    for (long long r = 0; r < gh; ++r) {
        for (long long c = 0; c < gw; ++c) {
            const long long sr = wrap(s.a * r + s.b * c, gh);
            const long long sc = wrap(s.c * r + s.d * c, gw);
            out[static_cast<std::size_t>(r * gw + c)] = values[static_cast<std::size_t>(sr * gw + sc)];
        }
    }
    return out;
}

}  // namespace prforge
