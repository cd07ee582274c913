#pragma once

// Multi-start initialization: m short HIO runs from random-phase starts, keep
// the k lowest-residual iterates, refine each with a long HIO run.

#include <algorithm>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "prforge/fourier.hpp"
#include "prforge/hio.hpp"
#include "prforge/parallel.hpp"
#include "prforge/rng.hpp"

namespace prforge {

struct InitConfig {
    std::size_t num_starts = 50;
    std::size_t short_iters = 50;
    std::size_t long_iters = 1000;
    std::size_t keep = 1;
    Seed master_seed = 0;
    HioConfig hio{};

    void validate() const {
        if (num_starts == 0 || short_iters == 0 || long_iters == 0 || keep == 0)
            throw std::invalid_argument("InitConfig: all counts must be at least 1");
        if (keep > num_starts) throw std::invalid_argument("InitConfig: keep must not exceed num_starts");
        hio.validate();
    }
};

/// x0 = A-dagger(y . exp(j theta)), theta ~ U[0, 2 pi) per bin in row-major order.
template <typename UniformSource>
ImageReal random_phase_start(const FourierOp& op, std::span<const double> magnitudes, UniformSource& rng) {
    op.check_measurement_size(magnitudes.size(), "random_phase_start");
    ComplexField field(op.outer_h(), op.outer_w());
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        field[i] = std::polar(magnitudes[i], theta);
    }
    return op.pseudoinverse(field);
}

template <typename UniformSource>
ImageReal random_phase_start(const FourierOp& op, const Measurement& meas, UniformSource& rng) {
    return random_phase_start(op, meas.magnitudes, rng);
}

/// Indices of the k smallest residuals in ascending order, ties by lower index.
inline std::vector<std::size_t> select_best(std::span<const double> residuals, std::size_t k) {
    if (k == 0 || k > residuals.size())
        throw std::out_of_range("select_best: k=" + std::to_string(k) + " out of range for " +
                                std::to_string(residuals.size()) + " candidates");
    std::vector<std::size_t> order(residuals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return residuals[a] < residuals[b]; });
    order.resize(k);
    return order;
}

struct InitCandidate {
    ImageReal image;
    double residual = 0.0;
    std::size_t branch = 0;
    double short_residual = 0.0;  ///< residual at selection time
    SolverTrace short_trace;
    SolverTrace long_trace;
};

/// Runs the stage; result is sorted by ascending final residual (ties by
/// branch) and is a pure function of (meas, cfg) for any worker count.
inline std::vector<InitCandidate> initialization_stage(const FourierOp& op, const Measurement& meas,
                                                       const InitConfig& cfg, std::size_t workers = 1) {
    cfg.validate();
    op.check_measurement_size(meas.magnitudes.size(), "initialization_stage");
    const std::span<const double> y = meas.magnitudes;

    struct Branch {
        ImageReal grid;
        SolverTrace trace;
        double residual = 0.0;
    };
    std::vector<Branch> branches(cfg.num_starts);
    parallel_for(cfg.num_starts, workers, [&](std::size_t b) {
        Rng rng(derive_seed(cfg.master_seed, StreamDomain::init_branch, b));
        auto& br = branches[b];
        br.grid = pad_to_grid(random_phase_start(op, y, rng));
        iterate_grid(op, br.grid, y, cfg.short_iters, cfg.hio, &br.trace);
        br.residual = br.trace.residuals.back();
    });

    std::vector<double> residuals(branches.size());
    for (std::size_t b = 0; b < branches.size(); ++b) residuals[b] = branches[b].residual;
    const auto chosen = select_best(residuals, cfg.keep);

    std::vector<InitCandidate> out(chosen.size());
    parallel_for(chosen.size(), workers, [&](std::size_t j) {
        auto& br = branches[chosen[j]];
        auto& cand = out[j];
        cand.branch = chosen[j];
        cand.short_residual = br.residual;
        cand.short_trace = br.trace;
        ImageReal grid = br.grid;  // refinement continues from the selected iterate
        iterate_grid(op, grid, y, cfg.long_iters, cfg.hio, &cand.long_trace);
        cand.image = crop_support(grid, op.inner_h(), op.inner_w());
        cand.residual = cand.long_trace.residuals.back();
    });
    std::stable_sort(out.begin(), out.end(), [](const InitCandidate& a, const InitCandidate& b) {
        if (a.residual != b.residual) return a.residual < b.residual;
        return a.branch < b.branch;
    });
    return out;
}

}  // namespace prforge
