#pragma once

// Test-time augmentation over flips or the full dihedral group: the warm
// starts are transformed, the measurement is permuted consistently in the
// Fourier domain, every branch is refined, and the inverse-transformed outputs
// are averaged with equal weight.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prforge/langevin.hpp"

namespace prforge {

enum class TtaMode { none, flip, d4 };

inline TtaMode parse_tta_mode(std::string_view s) {
    if (s == "none") return TtaMode::none;
    if (s == "flip") return TtaMode::flip;
    if (s == "d4") return TtaMode::d4;
    throw ConfigError("unknown TTA mode '" + std::string(s) + "' (expected none, flip or d4)");
}

inline constexpr std::string_view to_string(TtaMode m) noexcept {
    switch (m) {
        case TtaMode::none: return "none";
        case TtaMode::flip: return "flip";
        case TtaMode::d4: return "d4";
    }
    return "?";
}

inline std::vector<D4Transform> tta_elements(TtaMode mode) {
    switch (mode) {
        case TtaMode::none: return {D4Transform::R0};
        case TtaMode::flip: return {D4Transform::R0, D4Transform::R180};
        case TtaMode::d4: return {kD4Elements.begin(), kD4Elements.end()};
    }
    return {D4Transform::R0};
}

/// Permutes intensities and magnitudes so the result is the measurement of
/// the transformed image.
inline Measurement transform_measurement(const Measurement& meas, D4Transform t) {
    Measurement out = meas;
    out.intensities = permute_frequency_grid<double>(meas.intensities, meas.grid_h(), meas.grid_w(), t);
    out.magnitudes = permute_frequency_grid<double>(meas.magnitudes, meas.grid_h(), meas.grid_w(), t);
    return out;
}

/// Grid-level action of t on a support mask: the reflection/rotation of the
/// inner block about its own centre, extended periodically over the 2H x 2W grid.
inline SupportMask transform_support(const SupportMask& mask, std::size_t inner_h, std::size_t inner_w, D4Transform t) {
    if (swaps_axes(t) && inner_h != inner_w) throw DimensionError("transform_support: non-square support");
    const D4Matrix s = source_matrix(t);
    const auto gh = static_cast<long long>(mask.height());
    const auto gw = static_cast<long long>(mask.width());
    const auto ih = static_cast<long long>(inner_h);
    const auto iw = static_cast<long long>(inner_w);
    auto wrap = [](long long v, long long n) { return ((v % n) + n) % n; };
    std::vector<bool> inside(mask.height() * mask.width());
    for (long long r = 0; r < gh; ++r)
        for (long long c = 0; c < gw; ++c) {
            const long long dr = 2 * r - (ih - 1);
            const long long dc = 2 * c - (iw - 1);
            const long long sr = wrap((s.a * dr + s.b * dc + (ih - 1)) / 2, gh);
            const long long sc = wrap((s.c * dr + s.d * dc + (iw - 1)) / 2, gw);
            inside[static_cast<std::size_t>(r * gw + c)] = mask(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
    return SupportMask(mask.height(), mask.width(), std::move(inside));
}

struct TtaOptions {
    TtaMode mode = TtaMode::none;
    /// Test hook: every branch reuses the base chain streams instead of its own.
    bool share_streams = false;
};

/// Runs the branches of `mode` from one shared set of warm starts.
inline ReconstructionResult run_with_tta(const FourierOp& op, const Measurement& meas, const PipelineConfig& cfg,
                                         TtaOptions opts, std::size_t workers = 1, const ImageReal* truth = nullptr) {
    if (opts.mode == TtaMode::none) return run_prnet(op, meas, cfg, workers, truth);
    cfg.validate();
    const auto elements = tta_elements(opts.mode);
    if (opts.mode == TtaMode::d4 && op.inner_h() != op.inner_w())
        throw DimensionError("run_with_tta: d4 mode requires a square image");

    const auto starts = warm_starts(op, meas, cfg, workers);
    std::vector<ReconstructionResult> branches(elements.size());
    parallel_for(elements.size(), workers, [&](std::size_t b) {
        const D4Transform t = elements[b];
        std::vector<ImageReal> branch_starts;
        for (const auto& s : starts) branch_starts.push_back(apply_d4(s, t));
        const Seed stream = opts.share_streams ? cfg.master_seed : derive_seed(cfg.master_seed, StreamDomain::tta_branch, b);
        ImageReal branch_truth;
        if (truth) branch_truth = apply_d4(*truth, t);
        auto res = run_chains(op, transform_measurement(meas, t), std::move(branch_starts), cfg, stream, 1,
                              truth ? &branch_truth : nullptr);
        const D4Transform inv = inverse_d4(t);
        for (auto& img : res.images) img = apply_d4(img, inv);
        for (auto& tr : res.traces) tr.branch = b;
        branches[b] = std::move(res);
    });

    ReconstructionResult result;
    result.master_seed = cfg.master_seed;
    result.branches = elements.size();
    result.initial = starts;
    for (auto& br : branches) {
        for (auto& img : br.images) result.images.push_back(std::move(img));
        for (auto& tr : br.traces) result.traces.push_back(std::move(tr));
    }
    result.aggregate = aggregate_mean(result.images);
    return result;
}

}  // namespace prforge
