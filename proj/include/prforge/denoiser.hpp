#pragma once

// Denoisers D(x, sigma) and the score they induce, (D(x, sigma) - x) / sigma^2.
//
// Three models share one interface: identity, a mild Gaussian blur whose
// width follows sigma, and a small residual CNN loaded from a PRWT archive.
// The CNN sees normalised inputs (pixel / 255, sigma / 255) and predicts the
// noise residual in the same units; denoise() returns x - 255 * residual.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "prforge/image.hpp"
#include "prforge/weights.hpp"

namespace prforge {

struct NoiseLevel {
    double sigma = 0.0;

    explicit NoiseLevel(double s) : sigma(s) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("NoiseLevel: sigma must be finite and >= 0");
    }
};

inline constexpr double kPixelScale = 255.0;

/// Reflection about the edge samples without repeating them (d c b | a b c d).
inline std::size_t reflect_index(long long i, std::size_t n) noexcept {
    if (n == 1) return 0;
    const auto period = static_cast<long long>(2 * (n - 1));
    i %= period;
    if (i < 0) i += period;
    if (i >= static_cast<long long>(n)) i = period - i;
    return static_cast<std::size_t>(i);
}

// ---------------------------------------------------------------------------
// Residual CNN
// ---------------------------------------------------------------------------

/// Channel-major stack of H x W planes.
struct FeatureMap {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), data(c * h * w, 0.0) {}

    double& at(std::size_t c, std::size_t r, std::size_t col) noexcept { return data[(c * height + r) * width + col]; }
    double at(std::size_t c, std::size_t r, std::size_t col) const noexcept {
        return data[(c * height + r) * width + col];
    }
};

namespace detail {

inline FeatureMap conv3x3_reflect(const FeatureMap& in, const std::vector<float>& weight, const std::vector<float>& bias,
                                  std::size_t out_channels, bool relu) {
    const std::size_t h = in.height;
    const std::size_t w = in.width;
    const std::size_t ph = h + 2;
    const std::size_t pw = w + 2;
    std::vector<double> padded(in.channels * ph * pw);
    for (std::size_t c = 0; c < in.channels; ++c)
        for (std::size_t r = 0; r < ph; ++r)
            for (std::size_t q = 0; q < pw; ++q)
                padded[(c * ph + r) * pw + q] =
                    in.at(c, reflect_index(static_cast<long long>(r) - 1, h), reflect_index(static_cast<long long>(q) - 1, w));

    FeatureMap out(out_channels, h, w);
    for (std::size_t o = 0; o < out_channels; ++o) {
        double* dst = out.data.data() + o * h * w;
        std::fill(dst, dst + h * w, static_cast<double>(bias[o]));
        for (std::size_t c = 0; c < in.channels; ++c) {
            const float* k = weight.data() + (o * in.channels + c) * 9;
            const double* src = padded.data() + c * ph * pw;
            for (std::size_t dy = 0; dy < 3; ++dy) {
                for (std::size_t dx = 0; dx < 3; ++dx) {
                    const double kv = k[dy * 3 + dx];
                    if (kv == 0.0) continue;
                    for (std::size_t r = 0; r < h; ++r) {
                        const double* row = src + (r + dy) * pw + dx;
                        double* orow = dst + r * w;
                        for (std::size_t q = 0; q < w; ++q) orow[q] += kv * row[q];
                    }
                }
            }
        }
        if (relu)
            for (std::size_t i = 0; i < h * w; ++i) dst[i] = std::max(dst[i], 0.0);
    }
    return out;
}

}  // namespace detail

/// Forward pass of the fixed residual network on a 2-channel input
/// (normalised image, constant normalised sigma). Returns the 1-channel
/// predicted residual.
inline FeatureMap cnn_forward(const WeightsArchive& weights, const FeatureMap& input) {
    validate_architecture(weights);
    if (input.channels != cnn_arch::kInputChannels)
        throw ShapeMismatchError("cnn_forward: expected 2 input channels, got " + std::to_string(input.channels));
    if (input.height < 2 || input.width < 2) throw DimensionError("cnn_forward: reflect padding needs H, W >= 2");
    FeatureMap x = input;
    for (std::size_t l = 0; l < cnn_arch::kConvLayers; ++l) {
        const auto& wspec = weights.arch[2 * l];
        x = detail::conv3x3_reflect(x, weights.tensors[2 * l], weights.tensors[2 * l + 1], wspec.shape[0],
                                    wspec.activation == "relu");
    }
    return x;
}

inline FeatureMap cnn_input(const ImageReal& x, double sigma) {
    FeatureMap in(cnn_arch::kInputChannels, x.height(), x.width());
    for (std::size_t r = 0; r < x.height(); ++r)
        for (std::size_t c = 0; c < x.width(); ++c) {
            in.at(0, r, c) = x(r, c) / kPixelScale;
            in.at(1, r, c) = sigma / kPixelScale;
        }
    return in;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

struct IdentityDenoiser {};

struct GaussianBlurDenoiser {
    double kappa = 5.0;
    double max_std_px = 3.0;
};

struct ResidualCnnDenoiser {
    std::shared_ptr<const WeightsArchive> weights;
};

using DenoiserModel = std::variant<IdentityDenoiser, GaussianBlurDenoiser, ResidualCnnDenoiser>;

inline DenoiserModel make_cnn_denoiser(WeightsArchive weights) {
    validate_architecture(weights);
    return ResidualCnnDenoiser{std::make_shared<const WeightsArchive>(std::move(weights))};
}

/// Separable Gaussian blur with reflect boundary; std_px = 0 returns img.
inline ImageReal gaussian_blur(const ImageReal& img, double std_px) {
    if (std_px <= 0.0) return img;
    const int radius = static_cast<int>(std::ceil(3.0 * std_px));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (std_px * std_px));
        total += kernel[i + radius];
    }
    for (auto& k : kernel) k /= total;

    const std::size_t h = img.height();
    const std::size_t w = img.width();
    ImageReal tmp(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double s = 0.0;
            for (int i = -radius; i <= radius; ++i)
                s += kernel[i + radius] * img(r, reflect_index(static_cast<long long>(c) + i, w));
            tmp(r, c) = s;
        }
    ImageReal out(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double s = 0.0;
            for (int i = -radius; i <= radius; ++i)
                s += kernel[i + radius] * tmp(reflect_index(static_cast<long long>(r) + i, h), c);
            out(r, c) = s;
        }
    return out;
}

inline ImageReal denoise(const DenoiserModel& model, const ImageReal& x, NoiseLevel level) {
    if (!x.all_finite()) throw std::invalid_argument("denoise: input contains non-finite values");
    return std::visit(
        [&](const auto& m) -> ImageReal {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, IdentityDenoiser>) {
                return x;
            } else if constexpr (std::is_same_v<M, GaussianBlurDenoiser>) {
                return gaussian_blur(x, std::clamp(m.kappa * level.sigma, 0.0, m.max_std_px));
            } else {
                if (!m.weights) throw std::invalid_argument("denoise: residual CNN without weights");
                const FeatureMap residual = cnn_forward(*m.weights, cnn_input(x, level.sigma));
                ImageReal out(x.height(), x.width());
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - kPixelScale * residual.data[i];
                return out;
            }
        },
        model);
}

/// Anything usable as D(x, sigma).
template <typename D>
concept Denoiser = requires(const D& d, const ImageReal& x, NoiseLevel level) {
    { d(x, level) } -> std::convertible_to<ImageReal>;
};

/// (D(x, sigma) - x) / sigma^2.
template <Denoiser D>
ImageReal score_from_denoiser(const D& denoiser, const ImageReal& x, NoiseLevel level) {
    if (level.sigma == 0.0) throw std::invalid_argument("score_from_denoiser: sigma must be positive");
    const ImageReal d = denoiser(x, level);
    require_same_shape(d, x, "score_from_denoiser");
    const double inv = 1.0 / (level.sigma * level.sigma);
    ImageReal s(x.height(), x.width());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = (d[i] - x[i]) * inv;
    return s;
}

inline ImageReal score_from_denoiser(const DenoiserModel& model, const ImageReal& x, NoiseLevel level) {
    return score_from_denoiser([&](const ImageReal& v, NoiseLevel l) { return denoise(model, v, l); }, x, level);
}

}  // namespace prforge
