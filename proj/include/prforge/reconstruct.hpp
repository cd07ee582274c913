#pragma once

// Method dispatch shared by the command-line tool and the benchmark harness.

#include <cstddef>
#include <optional>

#include "prforge/config.hpp"
#include "prforge/hio.hpp"
#include "prforge/initialization.hpp"
#include "prforge/langevin.hpp"
#include "prforge/tta.hpp"

namespace prforge {

/// Reconstructs with `run.method`. The plain HIO baseline starts from the
/// random-phase start of initialization branch 0 and runs hio_iters iterations.
inline ReconstructionResult reconstruct(const FourierOp& op, const Measurement& meas, const RunConfig& run,
                                        std::size_t workers, const WeightsArchive* weights = nullptr,
                                        const ImageReal* truth = nullptr) {
    const PipelineConfig cfg = run.resolve(meas.alpha, weights);
    switch (run.method) {
        case Method::hio: {
            Rng rng(derive_seed(cfg.master_seed, StreamDomain::init_branch, 0));
            const auto x0 = random_phase_start(op, meas, rng);
            auto hio = run_hio(op, x0, meas, run.hio_iterations(), cfg.hio);
            ReconstructionResult r;
            r.master_seed = cfg.master_seed;
            r.initial = {x0};
            ChainTrace trace;
            for (std::size_t k = 0; k < hio.trace.residuals.size(); ++k) {
                ChainStepRecord rec{k + 1, hio.trace.residuals[k], std::nullopt};
                trace.steps.push_back(rec);
            }
            if (truth && !trace.steps.empty())
                trace.steps.back().psnr_db = resolve_conjugate_flip(hio.image, *truth).report.psnr_db;
            r.traces = {trace};
            r.images = {hio.image};
            r.aggregate = hio.image;
            return r;
        }
        case Method::init: {
            ReconstructionResult r;
            r.master_seed = cfg.master_seed;
            r.initial = warm_starts(op, meas, cfg, workers);
            r.images = r.initial;
            r.aggregate = aggregate_mean(r.images);
            for (std::size_t c = 0; c < r.images.size(); ++c) {
                ChainTrace trace;
                trace.chain = c;
                ChainStepRecord rec{0, residual(op, r.images[c], meas), std::nullopt};
                if (truth) rec.psnr_db = resolve_conjugate_flip(r.images[c], *truth).report.psnr_db;
                trace.steps.push_back(rec);
                r.traces.push_back(trace);
            }
            return r;
        }
        case Method::prnet_small:
        case Method::prnet_large:
            return run_with_tta(op, meas, cfg, TtaOptions{run.tta_mode(), false}, workers, truth);
    }
    return {};
}

}  // namespace prforge
