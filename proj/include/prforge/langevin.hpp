#pragma once

// Stochastic refinement: denoise, blend the measurement toward the current
// estimate, run K HIO iterations, inject Gaussian noise; repeated T times from
// warm-started estimates. Several chains run independently and are averaged.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "prforge/denoiser.hpp"
#include "prforge/fourier.hpp"
#include "prforge/hio.hpp"
#include "prforge/initialization.hpp"
#include "prforge/metrics.hpp"
#include "prforge/parallel.hpp"
#include "prforge/rng.hpp"

namespace prforge {

/// Measurement weights lambda_1..lambda_T, each in (0, 1].
class LambdaSchedule {
public:
    LambdaSchedule() = default;
    explicit LambdaSchedule(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
        if (lambdas_.empty()) throw std::invalid_argument("LambdaSchedule: empty schedule");
        for (double l : lambdas_)
            if (!(l > 0.0 && l <= 1.0)) throw std::invalid_argument("LambdaSchedule: entries must lie in (0, 1]");
    }

    [[nodiscard]] std::size_t size() const noexcept { return lambdas_.size(); }
    /// lambda_i for 1-based step i.
    [[nodiscard]] double at_step(std::size_t i) const { return lambdas_.at(i - 1); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return lambdas_; }

    friend bool operator==(const LambdaSchedule&, const LambdaSchedule&) = default;

private:
    std::vector<double> lambdas_;
};

/// Log-linear from lambda_max down to lambda_min over T steps.
inline LambdaSchedule default_schedule(std::size_t T, double lambda_max = 1.0, double lambda_min = 0.01) {
    if (T == 0) throw std::invalid_argument("default_schedule: T must be at least 1");
    if (!(lambda_min > 0.0 && lambda_min <= lambda_max && lambda_max <= 1.0))
        throw std::invalid_argument("default_schedule: need 0 < lambda_min <= lambda_max <= 1");
    if (T == 1) return LambdaSchedule({lambda_max});
    std::vector<double> l(T);
    const double a = std::log(lambda_max);
    const double b = std::log(lambda_min);
    for (std::size_t i = 0; i < T; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(T - 1);
        l[i] = std::exp(a + t * (b - a));
    }
    l.front() = lambda_max;
    l.back() = lambda_min;
    return LambdaSchedule(std::move(l));
}

struct PipelineConfig {
    std::size_t T = 18;
    std::size_t K = 5;
    HioConfig hio{};
    double alpha = 3.0;
    std::size_t chains = 1;
    Seed master_seed = 0;
    LambdaSchedule schedule = default_schedule(18);
    DenoiserModel denoiser = GaussianBlurDenoiser{};
    InitConfig init{};
    /// Denoiser noise level at step 1; default alpha / sqrt(2).
    std::optional<double> initial_sigma;
    /// Rotate warm starts and final chain images by 180 degrees when that
    /// brings them closer to a reference, so chains agree before averaging.
    bool align_orientation = true;

    void validate() const {
        if (T == 0 || K == 0 || chains == 0) throw std::invalid_argument("PipelineConfig: T, K, chains must be >= 1");
        if (schedule.size() != T)
            throw std::invalid_argument("PipelineConfig: schedule length " + std::to_string(schedule.size()) +
                                        " does not match T=" + std::to_string(T));
        if (!(alpha >= 0.0)) throw std::invalid_argument("PipelineConfig: alpha must be >= 0");
        hio.validate();
    }

    /// Noise std injected at the end of step i (and seen by the denoiser at i+1).
    [[nodiscard]] double injected_sigma(std::size_t i) const {
        return alpha * std::sqrt(schedule.at_step(i)) / std::numbers::sqrt2;
    }

    /// sigma_i = alpha sqrt(lambda_{i-1}) / sqrt(2), lambda_0 := 1.
    [[nodiscard]] double denoiser_sigma(std::size_t i) const {
        if (i <= 1) return initial_sigma.value_or(alpha / std::numbers::sqrt2);
        return injected_sigma(i - 1);
    }
};

/// Presets matching the small (single chain) and large (k = 10) pipelines.
inline PipelineConfig small_pipeline(double alpha, Seed seed) {
    PipelineConfig cfg;
    cfg.alpha = alpha;
    cfg.master_seed = seed;
    return cfg;
}

inline PipelineConfig large_pipeline(double alpha, Seed seed) {
    PipelineConfig cfg = small_pipeline(alpha, seed);
    cfg.chains = 10;
    cfg.init.num_starts = 100;
    cfg.init.keep = 10;
    return cfg;
}

/// lambda y + (1 - lambda) |A x|.
inline std::vector<double> blend_measurement(const FourierOp& op, std::span<const double> y, const ImageReal& x,
                                             double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("blend_measurement: lambda outside [0, 1]");
    op.check_measurement_size(y.size(), "blend_measurement");
    if (lambda == 1.0) return {y.begin(), y.end()};
    const auto current = op.magnitudes(x);
    if (lambda == 0.0) return current;
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = lambda * y[i] + (1.0 - lambda) * current[i];
    return out;
}

/// Adds scale * N(0, 1) to every pixel, row-major.
template <typename NormalSource>
void add_gaussian_noise(ImageReal& img, double scale, NormalSource& rng) {
    for (auto& v : img.pixels()) v += scale * rng.normal();
}

/// Single analytic Langevin step with gradient lookahead and step size sigma^2:
/// A-dagger(phase(A xd) . (lambda y + (1 - lambda)|A xd|)) + alpha sqrt(lambda/2) v,
/// xd = D(x, sigma).
template <typename NormalSource>
ImageReal langevin_update_eq15(const FourierOp& op, const ImageReal& x, std::span<const double> y, double lambda,
                               double alpha, const DenoiserModel& model, NoiseLevel sigma, NormalSource& rng) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("langevin_update_eq15: lambda outside [0, 1]");
    const ImageReal denoised = denoise(model, x, sigma);
    const auto field = op.apply(denoised);
    ComplexField target(field.height, field.width);
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double m = std::abs(field[i]);
        const Complex ph = m > 0.0 ? field[i] / m : Complex(1.0, 0.0);
        target[i] = ph * (lambda * y[i] + (1.0 - lambda) * m);
    }
    ImageReal out = op.pseudoinverse(target);
    add_gaussian_noise(out, alpha * std::sqrt(lambda) / std::numbers::sqrt2, rng);
    return out;
}

struct StepOutput {
    ImageReal denoised;    ///< x_i
    ImageReal next_input;  ///< x'_i (equals x_i at the final step)
    SolverTrace hio_trace;
};

/// Step i of the refinement loop, 1 <= i <= T. The last step returns the
/// bare denoiser output and draws no noise.
template <typename NormalSource>
StepOutput prnet_step(const FourierOp& op, const ImageReal& prev, const Measurement& meas, std::size_t i,
                      const PipelineConfig& cfg, NormalSource& rng) {
    if (i == 0 || i > cfg.T) throw std::out_of_range("prnet_step: step index outside [1, T]");
    StepOutput out;
    out.denoised = denoise(cfg.denoiser, prev, NoiseLevel(cfg.denoiser_sigma(i)));
    if (i == cfg.T) {
        out.next_input = out.denoised;
        return out;
    }
    const double lambda = cfg.schedule.at_step(i);
    const auto blended = blend_measurement(op, meas.magnitudes, out.denoised, lambda);
    ImageReal grid = pad_to_grid(out.denoised);
    iterate_grid(op, grid, blended, cfg.K, cfg.hio, &out.hio_trace);
    out.next_input = crop_support(grid, op.inner_h(), op.inner_w());
    add_gaussian_noise(out.next_input, cfg.injected_sigma(i), rng);
    return out;
}

struct ChainStepRecord {
    std::size_t iteration = 0;
    double residual = 0.0;
    std::optional<double> psnr_db;
};

struct ChainTrace {
    std::size_t branch = 0;
    std::size_t chain = 0;
    std::vector<ChainStepRecord> steps;
};

struct ReconstructionResult {
    std::vector<ImageReal> images;  ///< per chain (per branch x chain under TTA)
    ImageReal aggregate;
    std::vector<ChainTrace> traces;
    std::vector<ImageReal> initial;  ///< warm starts fed to the chains
    Seed master_seed = 0;
    std::size_t branches = 1;
};

inline ImageReal aggregate_mean(std::span<const ImageReal> images) {
    if (images.empty()) throw std::invalid_argument("aggregate_mean: empty image list");
    ImageReal out(images.front().height(), images.front().width());
    for (const auto& img : images) {
        require_same_shape(img, out, "aggregate_mean");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += img[i];
    }
    const double inv = 1.0 / static_cast<double>(images.size());
    for (auto& v : out.pixels()) v *= inv;
    return out;
}

/// Orients each image to agree with the first (smaller MSE of x vs R180 x).
inline std::vector<ImageReal> align_to_first(std::vector<ImageReal> images) {
    for (std::size_t j = 1; j < images.size(); ++j) {
        ImageReal flipped = apply_d4(images[j], D4Transform::R180);
        if (mean_squared_error(flipped, images[0]) < mean_squared_error(images[j], images[0]))
            images[j] = std::move(flipped);
    }
    return images;
}

/// Orients each image toward the one with the lowest measurement residual.
inline std::vector<ImageReal> align_to_lowest_residual(const FourierOp& op, const Measurement& meas,
                                                       std::vector<ImageReal> images) {
    if (images.size() < 2) return images;
    std::size_t ref = 0;
    double best = residual(op, images[0], meas);
    for (std::size_t j = 1; j < images.size(); ++j) {
        const double r = residual(op, images[j], meas);
        if (r < best) {
            best = r;
            ref = j;
        }
    }
    for (std::size_t j = 0; j < images.size(); ++j) {
        if (j == ref) continue;
        ImageReal flipped = apply_d4(images[j], D4Transform::R180);
        if (mean_squared_error(flipped, images[ref]) < mean_squared_error(images[j], images[ref]))
            images[j] = std::move(flipped);
    }
    return images;
}

/// Runs one chain per warm start; chain c draws from
/// derive_seed(stream_seed, chain, c).
inline ReconstructionResult run_chains(const FourierOp& op, const Measurement& meas, std::vector<ImageReal> starts,
                                       const PipelineConfig& cfg, Seed stream_seed, std::size_t workers = 1,
                                       const ImageReal* truth = nullptr) {
    cfg.validate();
    ReconstructionResult result;
    result.master_seed = cfg.master_seed;
    result.images.resize(starts.size());
    result.traces.resize(starts.size());
    parallel_for(starts.size(), workers, [&](std::size_t c) {
        Rng rng(derive_seed(stream_seed, StreamDomain::chain, c));
        ImageReal x = starts[c];
        auto& trace = result.traces[c];
        trace.chain = c;
        for (std::size_t i = 1; i <= cfg.T; ++i) {
            auto step = prnet_step(op, x, meas, i, cfg, rng);
            ChainStepRecord rec{i, residual(op, step.denoised, meas), std::nullopt};
            if (truth) rec.psnr_db = resolve_conjugate_flip(step.denoised, *truth).report.psnr_db;
            trace.steps.push_back(rec);
            x = std::move(step.next_input);
        }
        result.images[c] = std::move(x);
    });
    if (cfg.align_orientation) result.images = align_to_lowest_residual(op, meas, std::move(result.images));
    result.aggregate = aggregate_mean(result.images);
    result.initial = std::move(starts);
    return result;
}

inline std::vector<ImageReal> warm_starts(const FourierOp& op, const Measurement& meas, const PipelineConfig& cfg,
                                          std::size_t workers = 1) {
    InitConfig init = cfg.init;
    init.keep = cfg.chains;
    init.master_seed = cfg.master_seed;
    init.hio = cfg.hio;
    const auto candidates = initialization_stage(op, meas, init, workers);
    std::vector<ImageReal> starts;
    starts.reserve(candidates.size());
    for (const auto& c : candidates) starts.push_back(c.image);
    return cfg.align_orientation ? align_to_first(std::move(starts)) : starts;
}

/// Initialization stage followed by `cfg.chains` refinement chains and their mean.
inline ReconstructionResult run_prnet(const FourierOp& op, const Measurement& meas, const PipelineConfig& cfg,
                                      std::size_t workers = 1, const ImageReal* truth = nullptr) {
    cfg.validate();
    return run_chains(op, meas, warm_starts(op, meas, cfg, workers), cfg, cfg.master_seed, workers, truth);
}

}  // namespace prforge
