#pragma once

// Error Reduction and Hybrid Input-Output iterations.
//
// Iterates live on the full 2H x 2W grid so that the support constraint can
// act on the padded region; callers see images cropped back to H x W.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "prforge/fourier.hpp"
#include "prforge/image.hpp"

namespace prforge {

struct HioConfig {
    double beta = 0.9;
    bool enforce_support = true;
    bool enforce_nonneg = true;

    void validate() const {
        if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("HioConfig: beta must lie in [0, 1]");
    }
};

struct SolverTrace {
    std::vector<double> residuals;
    [[nodiscard]] std::size_t iterations() const noexcept { return residuals.size(); }
};

struct HioResult {
    ImageReal image;
    SolverTrace trace;
};

/// Real part of A-dagger(y . phase(A grid)) on the full grid.
inline ImageReal project_grid(const FourierOp& op, const ImageReal& grid, std::span<const double> magnitudes) {
    op.check_measurement_size(magnitudes.size(), "project_grid");
    auto field = op.forward_grid(grid);
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double m = std::abs(field[i]);
        field[i] = m > 0.0 ? field[i] * (magnitudes[i] / m) : Complex(magnitudes[i], 0.0);
    }
    return op.inverse_grid(field);
}

/// A-dagger(y . Ax/|Ax|), phase 1 where |Ax| = 0.
inline ImageReal measurement_projection(const FourierOp& op, const ImageReal& img, std::span<const double> magnitudes) {
    op.check_inner(img, "measurement_projection");
    return crop_support(project_grid(op, pad_to_grid(img), magnitudes), op.inner_h(), op.inner_w());
}

inline bool violates(double value, bool inside, const HioConfig& cfg) noexcept {
    return (cfg.enforce_support && !inside) || (cfg.enforce_nonneg && value < 0.0);
}

/// out = projected off the violation set, prev - beta * projected on it.
inline ImageReal hio_step(const ImageReal& prev, const ImageReal& projected, const HioConfig& cfg,
                          const SupportMask& support) {
    require_same_shape(prev, projected, "hio_step");
    if (support.height() != prev.height() || support.width() != prev.width())
        throw DimensionError("hio_step: support mask shape mismatch");
    ImageReal out(prev.height(), prev.width());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = violates(projected[i], support[i], cfg) ? prev[i] - cfg.beta * projected[i] : projected[i];
    }
    return out;
}

/// Same step with every pixel treated as inside the support.
inline ImageReal hio_step(const ImageReal& prev, const ImageReal& projected, const HioConfig& cfg) {
    return hio_step(prev, projected, cfg, SupportMask::full(prev.height(), prev.width()));
}

/// Hard projection: zero outside the support, clamp negatives to zero.
inline ImageReal er_step(const ImageReal& prev, const ImageReal& projected, const HioConfig& cfg,
                         const SupportMask& support) {
    require_same_shape(prev, projected, "er_step");
    if (support.height() != prev.height() || support.width() != prev.width())
        throw DimensionError("er_step: support mask shape mismatch");
    ImageReal out(prev.height(), prev.width());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = violates(projected[i], support[i], cfg) ? 0.0 : projected[i];
    }
    return out;
}

inline ImageReal er_step(const ImageReal& prev, const ImageReal& projected, const HioConfig& cfg) {
    return er_step(prev, projected, cfg, SupportMask::full(prev.height(), prev.width()));
}

enum class SolverKind { hio, er };

/// Runs `iters` iterations in place on a full-grid iterate, appending the
/// residual of the cropped iterate after each one when `trace` is given.
inline void iterate_grid(const FourierOp& op, ImageReal& grid, std::span<const double> magnitudes, std::size_t iters,
                         const HioConfig& cfg, SolverTrace* trace, SolverKind kind = SolverKind::hio) {
    op.check_grid(grid.height(), grid.width(), "iterate_grid");
    const SupportMask support = op.support();
    for (std::size_t k = 0; k < iters; ++k) {
        const ImageReal projected = project_grid(op, grid, magnitudes);
        grid = kind == SolverKind::hio ? hio_step(grid, projected, cfg, support)
                                       : er_step(grid, projected, cfg, support);
        if (trace) trace->residuals.push_back(residual(op, crop_support(grid, op.inner_h(), op.inner_w()), magnitudes));
    }
}

inline HioResult run_hio(const FourierOp& op, const ImageReal& x0, std::span<const double> magnitudes,
                         std::size_t iters, const HioConfig& cfg = {}) {
    cfg.validate();
    if (iters == 0) throw std::invalid_argument("run_hio: iters must be at least 1");
    op.check_inner(x0, "run_hio");
    ImageReal grid = pad_to_grid(x0);
    HioResult result;
    result.trace.residuals.reserve(iters);
    iterate_grid(op, grid, magnitudes, iters, cfg, &result.trace);
    result.image = crop_support(grid, op.inner_h(), op.inner_w());
    return result;
}

inline HioResult run_hio(const FourierOp& op, const ImageReal& x0, const Measurement& meas, std::size_t iters,
                         const HioConfig& cfg = {}) {
    return run_hio(op, x0, meas.magnitudes, iters, cfg);
}

inline HioResult run_er(const FourierOp& op, const ImageReal& x0, std::span<const double> magnitudes,
                        std::size_t iters, const HioConfig& cfg = {}) {
    if (iters == 0) throw std::invalid_argument("run_er: iters must be at least 1");
    op.check_inner(x0, "run_er");
    ImageReal grid = pad_to_grid(x0);
    HioResult result;
    iterate_grid(op, grid, magnitudes, iters, cfg, &result.trace, SolverKind::er);
    result.image = crop_support(grid, op.inner_h(), op.inner_w());
    return result;
}

}  // namespace prforge
