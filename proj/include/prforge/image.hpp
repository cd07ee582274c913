#pragma once

// Real-valued images, the compact support mask on the oversampled grid, and
// the eight symmetries of the square acting on pixel indices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prforge/errors.hpp"

namespace prforge {

/// Row-major H x W real image. Pixel values nominally lie in [0, 255] but any
/// finite value is allowed (iterates of the solvers routinely leave that range).
class ImageReal {
public:
    ImageReal() = default;

    ImageReal(std::size_t height, std::size_t width, double fill = 0.0)
        : height_(height), width_(width), data_(height * width, fill) {}

    ImageReal(std::size_t height, std::size_t width, std::vector<double> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (data_.size() != height_ * width_) {
            throw DimensionError("image data length " + std::to_string(data_.size()) + " does not match " +
                                 std::to_string(height_) + "x" + std::to_string(width_));
        }
    }

    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
    [[nodiscard]] bool is_square() const noexcept { return height_ == width_; }

    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * width_ + c]; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * width_ + c]; }
    [[nodiscard]] double& operator[](std::size_t i) noexcept { return data_[i]; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return data_[i]; }

    [[nodiscard]] std::span<double> pixels() noexcept { return data_; }
    [[nodiscard]] std::span<const double> pixels() const noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& vector() const noexcept { return data_; }

    [[nodiscard]] bool same_shape(const ImageReal& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const ImageReal&, const ImageReal&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const ImageReal& a, const ImageReal& b, std::string_view what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": shape " + std::to_string(a.height()) + "x" +
                             std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                             std::to_string(b.width()));
    }
}

inline double dot(const ImageReal& a, const ImageReal& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const ImageReal& a) noexcept {
    double s = 0.0;
    for (double v : a.pixels()) s += v * v;
    return s;
}

inline double mean_squared_error(const ImageReal& a, const ImageReal& b) {
    require_same_shape(a, b, "mean_squared_error");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

/// Membership mask on the 2H x 2W oversampled grid.
class SupportMask {
public:
    SupportMask() = default;
    SupportMask(std::size_t height, std::size_t width, std::vector<bool> inside)
        : height_(height), width_(width), inside_(std::move(inside)) {
        if (inside_.size() != height_ * width_) throw DimensionError("support mask length mismatch");
    }

    /// Top-left inner_h x inner_w block of a (2 inner_h) x (2 inner_w) grid.
    static SupportMask compact(std::size_t inner_h, std::size_t inner_w) {
        const std::size_t gh = 2 * inner_h;
        const std::size_t gw = 2 * inner_w;
        std::vector<bool> inside(gh * gw, false);
        for (std::size_t r = 0; r < inner_h; ++r)
            for (std::size_t c = 0; c < inner_w; ++c) inside[r * gw + c] = true;
        return SupportMask(gh, gw, std::move(inside));
    }

    /// Every pixel inside; used when constraints are applied to a bare image.
    static SupportMask full(std::size_t height, std::size_t width) {
        return SupportMask(height, width, std::vector<bool>(height * width, true));
    }

    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] bool operator[](std::size_t i) const noexcept { return inside_[i]; }
    [[nodiscard]] bool operator()(std::size_t r, std::size_t c) const noexcept { return inside_[r * width_ + c]; }

    friend bool operator==(const SupportMask&, const SupportMask&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<bool> inside_;
};

/// Zero-pads an H x W image into the top-left block of a 2H x 2W grid.
inline ImageReal pad_to_grid(const ImageReal& img) {
    ImageReal grid(2 * img.height(), 2 * img.width());
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) grid(r, c) = img(r, c);
    return grid;
}

/// Top-left H x W block of a 2H x 2W grid (adjoint of pad_to_grid).
inline ImageReal crop_support(const ImageReal& grid, std::size_t height, std::size_t width) {
    if (grid.height() != 2 * height || grid.width() != 2 * width) {
        throw DimensionError("crop_support: grid " + std::to_string(grid.height()) + "x" +
                             std::to_string(grid.width()) + " does not match image " + std::to_string(height) +
                             "x" + std::to_string(width));
    }
    ImageReal img(height, width);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) img(r, c) = grid(r, c);
    return img;
}

inline ImageReal crop_support(const ImageReal& grid) {
    if (grid.height() % 2 != 0 || grid.width() % 2 != 0) throw DimensionError("crop_support: odd grid dimensions");
    return crop_support(grid, grid.height() / 2, grid.width() / 2);
}

// ---------------------------------------------------------------------------
// Dihedral group D4
// ---------------------------------------------------------------------------

/// Rotations are counter-clockwise as displayed (row 0 at the top).
enum class D4Transform { R0, R90, R180, R270, HF, VF, DF, ADF };

inline constexpr std::array<D4Transform, 8> kD4Elements = {D4Transform::R0, D4Transform::R90, D4Transform::R180,
                                                            D4Transform::R270, D4Transform::HF, D4Transform::VF,
                                                            D4Transform::DF, D4Transform::ADF};

inline constexpr std::string_view to_string(D4Transform t) noexcept {
    switch (t) {
        case D4Transform::R0: return "R0";
        case D4Transform::R90: return "R90";
        case D4Transform::R180: return "R180";
        case D4Transform::R270: return "R270";
        case D4Transform::HF: return "HF";
        case D4Transform::VF: return "VF";
        case D4Transform::DF: return "DF";
        case D4Transform::ADF: return "ADF";
    }
    return "?";
}

/// Integer 2x2 matrix S with out[d] = in[S d] in centred (row, col) coordinates.
struct D4Matrix {
    int a, b, c, d;  // [[a, b], [c, d]]
    friend constexpr bool operator==(const D4Matrix&, const D4Matrix&) = default;
};

inline constexpr D4Matrix source_matrix(D4Transform t) noexcept {
    switch (t) {
        case D4Transform::R0: return {1, 0, 0, 1};
        case D4Transform::R90: return {0, 1, -1, 0};
        case D4Transform::R180: return {-1, 0, 0, -1};
        case D4Transform::R270: return {0, -1, 1, 0};
        case D4Transform::HF: return {1, 0, 0, -1};
        case D4Transform::VF: return {-1, 0, 0, 1};
        case D4Transform::DF: return {0, 1, 1, 0};
        case D4Transform::ADF: return {0, -1, -1, 0};
    }
    return {1, 0, 0, 1};
}

/// Whether the element exchanges the row and column axes.
inline constexpr bool swaps_axes(D4Transform t) noexcept {
    return source_matrix(t).a == 0;
}

inline constexpr D4Transform from_source_matrix(D4Matrix m) noexcept {
    for (D4Transform t : kD4Elements)
        if (source_matrix(t) == m) return t;
    return D4Transform::R0;
}

inline constexpr D4Transform inverse_d4(D4Transform t) noexcept {
    const D4Matrix s = source_matrix(t);
    return from_source_matrix({s.a, s.c, s.b, s.d});  // orthogonal: inverse is transpose
}

/// The element equal to applying `first` and then `second`.
inline constexpr D4Transform compose_d4(D4Transform first, D4Transform second) noexcept {
    const D4Matrix p = source_matrix(first);
    const D4Matrix q = source_matrix(second);
    return from_source_matrix({p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d, p.c * q.a + p.d * q.c,
                               p.c * q.b + p.d * q.d});
}

/// Applies a D4 element to the pixel grid about the image centre. Pure index
/// permutation; 90-degree family elements require a square image.
inline ImageReal apply_d4(const ImageReal& img, D4Transform t) {
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    if (swaps_axes(t) && h != w) {
        throw DimensionError("apply_d4: " + std::string(to_string(t)) + " requires a square image, got " +
                             std::to_string(h) + "x" + std::to_string(w));
    }
    const D4Matrix s = source_matrix(t);
    const auto hh = static_cast<long long>(h);
    const auto ww = static_cast<long long>(w);
    ImageReal out(h, w);
    for (long long r = 0; r < hh; ++r) {
        for (long long c = 0; c < ww; ++c) {
            // doubled centred coordinates keep everything integral
            const long long dr = 2 * r - (hh - 1);
            const long long dc = 2 * c - (ww - 1);
            const long long sr = (s.a * dr + s.b * dc + (hh - 1)) / 2;
            const long long sc = (s.c * dr + s.d * dc + (ww - 1)) / 2;
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
                img(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
    }
    return out;
}

}  // namespace prforge
