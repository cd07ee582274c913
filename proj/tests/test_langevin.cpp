#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "prforge/langevin.hpp"

using namespace prforge;
using Catch::Approx;

namespace {

double max_abs_diff(const ImageReal& a, const ImageReal& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Normal source that records how many draws were taken.
struct CountingRng {
    Rng inner{1};
    std::size_t draws = 0;
    double normal() {
        ++draws;
        return inner.normal();
    }
    double uniform() {
        ++draws;
        return inner.uniform();
    }
};

PipelineConfig tiny_config(double alpha, DenoiserModel model) {
    PipelineConfig cfg = small_pipeline(alpha, 5);
    cfg.T = 4;
    cfg.K = 3;
    cfg.schedule = default_schedule(4);
    cfg.denoiser = std::move(model);
    cfg.init.num_starts = 4;
    cfg.init.short_iters = 5;
    cfg.init.long_iters = 20;
    return cfg;
}

}  // namespace

TEST_CASE("default schedule", "[langevin][schedule]") {
    CHECK(default_schedule(1).values() == std::vector<double>{1.0});
    const auto s3 = default_schedule(3, 1.0, 0.01).values();
    CHECK(s3[0] == 1.0);
    CHECK(s3[1] == Approx(0.1).epsilon(1e-14));
    CHECK(s3[2] == 0.01);
    for (std::size_t T : {2, 5, 18, 40}) {
        const auto s = default_schedule(T, 0.8, 0.02).values();
        CHECK(s.front() == 0.8);
        CHECK(s.back() == 0.02);
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);
    }
    CHECK_THROWS(default_schedule(0));
    CHECK_THROWS(default_schedule(3, 0.1, 0.5));
    CHECK_THROWS(LambdaSchedule({0.5, 0.0}));
    CHECK_THROWS(LambdaSchedule({1.5}));
}

TEST_CASE("noise levels follow the schedule", "[langevin][schedule]") {
    PipelineConfig cfg;
    cfg.alpha = 3.0;
    CHECK(cfg.denoiser_sigma(1) == Approx(3.0 / std::sqrt(2.0)));
    for (std::size_t i = 2; i <= cfg.T; ++i) {
        CHECK(cfg.denoiser_sigma(i) == cfg.injected_sigma(i - 1));
        CHECK(cfg.injected_sigma(i) == Approx(3.0 * std::sqrt(cfg.schedule.at_step(i)) / std::sqrt(2.0)));
    }
    cfg.initial_sigma = 0.25;
    CHECK(cfg.denoiser_sigma(1) == 0.25);
    cfg.T = 5;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("blend_measurement", "[langevin]") {
    const FourierOp op(4, 4);
    const ImageReal x = oracle::random_image(4, 4, 1);
    const auto y = op.magnitudes(oracle::random_image(4, 4, 2));
    const auto ax = op.magnitudes(x);
    CHECK(blend_measurement(op, y, x, 1.0) == y);
    CHECK(blend_measurement(op, y, x, 0.0) == ax);
    const auto half = blend_measurement(op, ax, x, 0.5);
    for (std::size_t i = 0; i < ax.size(); ++i) CHECK(half[i] == Approx(ax[i]).margin(1e-12));
    const auto mix = blend_measurement(op, y, x, 0.3);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(mix[i] >= 0.0);
        CHECK(mix[i] == Approx(0.3 * y[i] + 0.7 * ax[i]).margin(1e-12));
    }
    CHECK_THROWS(blend_measurement(op, y, x, 1.2));
}

TEST_CASE("analytic update reductions", "[langevin][eq15]") {
    const FourierOp op(8, 8);
    const ImageReal x = oracle::random_image(8, 8, 3);
    const auto y = op.magnitudes(oracle::random_image(8, 8, 4));
    const DenoiserModel blur = GaussianBlurDenoiser{};
    const NoiseLevel sigma(0.3);
    const ImageReal xd = denoise(blur, x, sigma);

    ZeroNormal zero;
    const ImageReal one = langevin_update_eq15(op, x, y, 1.0, 3.0, blur, sigma, zero);
    CHECK(max_abs_diff(one, measurement_projection(op, xd, y)) <= 1e-12);

    Rng rng(8);
    const ImageReal none = langevin_update_eq15(op, x, y, 0.0, 3.0, blur, sigma, rng);
    CHECK(max_abs_diff(none, xd) <= 1e-12);

    Rng r1(9), r2(10);
    CHECK(langevin_update_eq15(op, x, y, 0.4, 0.0, blur, sigma, r1) ==
          langevin_update_eq15(op, x, y, 0.4, 0.0, blur, sigma, r2));
}

TEST_CASE("prnet_step final step is the bare denoiser output", "[langevin][step]") {
    const FourierOp op(8, 8);
    const auto meas = simulate(op, oracle::random_image(8, 8, 5), 3.0, Seed{1});
    const PipelineConfig cfg = tiny_config(3.0, GaussianBlurDenoiser{});
    const ImageReal prev = oracle::random_image(8, 8, 6);
    CountingRng rng;
    const auto out = prnet_step(op, prev, meas, cfg.T, cfg, rng);
    CHECK(rng.draws == 0);
    CHECK(out.denoised == denoise(cfg.denoiser, prev, NoiseLevel(cfg.denoiser_sigma(cfg.T))));
    CHECK(out.next_input == out.denoised);
    CHECK(out.hio_trace.iterations() == 0);
    CHECK_THROWS(prnet_step(op, prev, meas, 0, cfg, rng));
    CHECK_THROWS(prnet_step(op, prev, meas, cfg.T + 1, cfg, rng));

    const auto mid = prnet_step(op, prev, meas, 1, cfg, rng);
    CHECK(rng.draws == 64);  // one draw per support pixel
    CHECK(mid.hio_trace.iterations() == cfg.K);
}

TEST_CASE("prnet_step with unconstrained HIO equals ER projections", "[langevin][step]") {
    const FourierOp op(8, 8);
    const auto meas = simulate(op, oracle::random_image(8, 8, 7), 1.0, Seed{2});
    PipelineConfig cfg = tiny_config(1.0, IdentityDenoiser{});
    cfg.hio.enforce_nonneg = false;
    cfg.hio.enforce_support = false;
    const ImageReal prev = oracle::random_image(8, 8, 8);
    ZeroNormal zero;
    const auto out = prnet_step(op, prev, meas, 2, cfg, zero);
    const auto blended = blend_measurement(op, meas.magnitudes, prev, cfg.schedule.at_step(2));
    const auto er = run_er(op, prev, blended, cfg.K, cfg.hio);
    CHECK(out.next_input == er.image);
}

TEST_CASE("noiseless truth is a fixed point of prnet_step", "[langevin][step]") {
    const FourierOp op(8, 8);
    const ImageReal truth = oracle::random_image(8, 8, 9);
    const auto meas = simulate(op, truth, 0.0, Seed{0});
    const PipelineConfig cfg = tiny_config(0.0, IdentityDenoiser{});
    Rng rng(3);
    for (std::size_t i = 1; i < cfg.T; ++i) {
        const auto out = prnet_step(op, truth, meas, i, cfg, rng);
        CHECK(max_abs_diff(out.next_input, truth) <= 1e-9);
    }
}

TEST_CASE("injected noise has std alpha sqrt(lambda) / sqrt(2)", "[langevin][noise][statistics]") {
    const FourierOp op(8, 8);
    const auto meas = simulate(op, oracle::random_image(8, 8, 10), 0.0, Seed{0});
    PipelineConfig cfg = tiny_config(3.0, IdentityDenoiser{});
    const ImageReal prev = oracle::random_image(8, 8, 11);
    const std::size_t i = 2;
    ZeroNormal zero;
    const ImageReal z = prnet_step(op, prev, meas, i, cfg, zero).next_input;
    Rng rng(77);
    double s2 = 0;
    std::size_t n = 0;
    while (n < 100000) {
        const ImageReal out = prnet_step(op, prev, meas, i, cfg, rng).next_input;
        for (std::size_t p = 0; p < out.size(); ++p) s2 += (out[p] - z[p]) * (out[p] - z[p]);
        n += out.size();
    }
    const double expected = 3.0 * std::sqrt(cfg.schedule.at_step(i)) / std::sqrt(2.0);
    CHECK(std::sqrt(s2 / static_cast<double>(n)) == Approx(expected).epsilon(0.03));
}

TEST_CASE("aggregate_mean", "[langevin][aggregate]") {
    const ImageReal x = oracle::random_image(5, 5, 12);
    const std::vector<ImageReal> single{x};
    CHECK(aggregate_mean(single) == x);
    ImageReal comp = x;
    for (auto& v : comp.pixels()) v = -v + 510.0;
    const std::vector<ImageReal> pair{x, comp};
    const ImageReal flat = aggregate_mean(pair);
    for (double v : flat.pixels()) CHECK(v == Approx(255.0).margin(1e-12));

    std::vector<ImageReal> stack;
    for (Seed s = 0; s < 10; ++s) stack.push_back(oracle::random_image(5, 5, 100 + s));
    const ImageReal mean = aggregate_mean(stack);
    for (std::size_t p = 0; p < 25; ++p) {
        double sum = 0;
        for (const auto& img : stack) sum += img[p];
        CHECK(mean[p] == Approx(sum / 10.0).margin(1e-12));
    }
    CHECK_THROWS(aggregate_mean(std::vector<ImageReal>{}));
    CHECK_THROWS(aggregate_mean(std::vector<ImageReal>{x, ImageReal(4, 5)}));
}

TEST_CASE("run_prnet: single chain, identical chains, Jensen", "[langevin][run]") {
    const FourierOp op(8, 8);
    const ImageReal truth = oracle::random_image(8, 8, 13);
    const auto meas = simulate(op, truth, 2.0, Seed{4});
    PipelineConfig cfg = tiny_config(2.0, GaussianBlurDenoiser{});

    const auto small = run_prnet(op, meas, cfg);
    REQUIRE(small.images.size() == 1);
    CHECK(small.aggregate == small.images[0]);
    CHECK(small.traces[0].steps.size() == cfg.T);

    cfg.chains = 3;
    const auto large = run_prnet(op, meas, cfg, 1, &truth);
    REQUIRE(large.images.size() == 3);
    double mean_mse = 0;
    for (const auto& img : large.images) mean_mse += mean_squared_error(img, truth) / 3.0;
    CHECK(mean_squared_error(large.aggregate, truth) <= mean_mse + 1e-12);
    for (const auto& t : large.traces) {
        for (const auto& s : t.steps) CHECK(s.psnr_db.has_value());
    }
    CHECK(run_prnet(op, meas, cfg, 3).aggregate == large.aggregate);

    const std::vector<ImageReal> same(3, large.initial[0]);
    PipelineConfig det = cfg;
    det.alpha = 0.0;
    const auto eq = run_chains(op, meas, same, det, 1);
    CHECK(max_abs_diff(eq.aggregate, eq.images[1]) <= 1e-12);
}

TEST_CASE("chains are independent of one another", "[langevin][run]") {
    const FourierOp op(8, 8);
    const auto meas = simulate(op, oracle::random_image(8, 8, 14), 0.0, Seed{0});
    PipelineConfig cfg = tiny_config(0.0, GaussianBlurDenoiser{});
    const ImageReal a = oracle::random_image(8, 8, 15);
    const ImageReal b = oracle::random_image(8, 8, 16);
    const auto ab = run_chains(op, meas, {a, b}, cfg, 1);
    const auto ba = run_chains(op, meas, {b, a}, cfg, 1);
    CHECK(ab.images[0] == ba.images[1]);
    CHECK(ab.images[1] == ba.images[0]);
}

TEST_CASE("final chain images are oriented toward the lowest-residual chain", "[langevin][aggregate]") {
    const FourierOp op(6, 6);
    const ImageReal truth = oracle::random_image(6, 6, 17);
    const auto meas = simulate(op, truth, 0.0, Seed{0});
    ImageReal noisy = truth;
    for (auto& v : noisy.pixels()) v += 3.0;
    const ImageReal noisy_rot = apply_d4(noisy, D4Transform::R180);

    const auto out = align_to_lowest_residual(op, meas, {noisy_rot, truth});
    CHECK(out[1] == truth);
    CHECK(max_abs_diff(out[0], noisy) <= 1e-12);

    const auto kept = align_to_lowest_residual(op, meas, {noisy, truth});
    CHECK(kept[0] == noisy);
    CHECK(align_to_lowest_residual(op, meas, {noisy_rot})[0] == noisy_rot);

    PipelineConfig cfg = tiny_config(0.0, IdentityDenoiser{});
    cfg.align_orientation = false;
    const auto raw = run_chains(op, meas, {apply_d4(truth, D4Transform::R180), truth}, cfg, 1);
    cfg.align_orientation = true;
    const auto aligned = run_chains(op, meas, {apply_d4(truth, D4Transform::R180), truth}, cfg, 1);
    CHECK(max_abs_diff(aligned.images[0], aligned.images[1]) < max_abs_diff(raw.images[0], raw.images[1]));
    CHECK(max_abs_diff(aligned.aggregate, truth) <= 1e-6);
}
