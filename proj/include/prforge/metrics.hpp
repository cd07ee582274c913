#pragma once

// PSNR, single-scale SSIM, and conjugate-flip ambiguity resolution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "prforge/image.hpp"

namespace prforge {

inline double psnr_from_mse(double mse, double peak = 255.0) {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

/// 10 log10(peak^2 / MSE); +infinity when the images are identical.
inline double psnr(const ImageReal& a, const ImageReal& b, double peak = 255.0) {
    require_same_shape(a, b, "psnr");
    return psnr_from_mse(mean_squared_error(a, b), peak);
}

struct SsimParams {
    std::size_t window = 11;
    double gaussian_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
};

/// Mean local SSIM over all fully-contained window positions.
inline double ssim(const ImageReal& a, const ImageReal& b, const SsimParams& p = {}) {
    require_same_shape(a, b, "ssim");
    if (a.height() < p.window || a.width() < p.window)
        throw DimensionError("ssim: image smaller than the " + std::to_string(p.window) + "x" +
                             std::to_string(p.window) + " window");
    const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
    const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

    std::vector<double> g(p.window);
    const double centre = (static_cast<double>(p.window) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < p.window; ++i) {
        const double d = static_cast<double>(i) - centre;
        g[i] = std::exp(-d * d / (2.0 * p.gaussian_sigma * p.gaussian_sigma));
        total += g[i];
    }
    for (auto& v : g) v /= total;

    const std::size_t oh = a.height() - p.window + 1;
    const std::size_t ow = a.width() - p.window + 1;
    double sum = 0.0;
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t i = 0; i < p.window; ++i) {
                for (std::size_t j = 0; j < p.window; ++j) {
                    const double wgt = g[i] * g[j];
                    const double x = a(r + i, c + j);
                    const double y = b(r + i, c + j);
                    mx += wgt * x;
                    my += wgt * y;
                    sxx += wgt * x * x;
                    syy += wgt * y * y;
                    sxy += wgt * x * y;
                }
            }
            const double vx = sxx - mx * mx;
            const double vy = syy - my * my;
            const double cxy = sxy - mx * my;
            sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    return sum / static_cast<double>(oh * ow);
}

struct MetricReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
    bool resolved_flip = false;
};

struct OrientedReconstruction {
    ImageReal image;
    MetricReport report;
};

inline MetricReport evaluate_pair(const ImageReal& recon, const ImageReal& truth) {
    MetricReport r;
    r.psnr_db = psnr(recon, truth);
    r.ssim = truth.height() >= 11 && truth.width() >= 11 ? ssim(recon, truth)
                                                          : std::numeric_limits<double>::quiet_NaN();
    return r;
}

/// Chooses between recon and its 180-degree rotation by PSNR against truth;
/// ties keep the unrotated image.
inline OrientedReconstruction resolve_conjugate_flip(const ImageReal& recon, const ImageReal& truth) {
    require_same_shape(recon, truth, "resolve_conjugate_flip");
    // R180 reverses the row-major index; both sums run in recon order so a
    // 180-degree-symmetric truth gives bitwise-equal errors.
    const std::size_t n = recon.size();
    double e0 = 0.0;
    double e1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d0 = recon[j] - truth[j];
        const double d1 = recon[j] - truth[n - 1 - j];
        e0 += d0 * d0;
        e1 += d1 * d1;
    }
    if (e1 < e0) {
        ImageReal flipped = apply_d4(recon, D4Transform::R180);
        auto report = evaluate_pair(flipped, truth);
        report.psnr_db = psnr_from_mse(e1 / static_cast<double>(n));
        report.resolved_flip = true;
        return {std::move(flipped), report};
    }
    return {recon, evaluate_pair(recon, truth)};
}

}  // namespace prforge
