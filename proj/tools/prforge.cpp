// prforge: simulate, reconstruct, evaluate and benchmark Fourier phase retrieval.
//
// Exit codes: 0 success, 1 runtime or numeric failure, 2 usage or configuration error.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prforge/prforge.hpp"

namespace fs = std::filesystem;
using namespace prforge;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p, const char* what) {
    if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

/// Shortest round-trip decimal, always with a fractional part; "inf" for +infinity.
std::string format_metric(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

void write_trace_csv(const fs::path& path, const ReconstructionResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "branch,chain,iteration,residual,psnr_db\n";
    for (const auto& t : r.traces)
        for (const auto& s : t.steps)
            out << t.branch << ',' << t.chain << ',' << s.iteration << ',' << format_real(s.residual) << ','
                << (s.psnr_db ? format_real(*s.psnr_db) : "") << '\n';
}

/// Raw little-endian float64 dump of the warm starts, one image after another.
void write_init_dump(const fs::path& path, const ReconstructionResult& r) {
    binio::Bytes bytes;
    for (const auto& img : r.initial)
        for (double v : img.pixels()) binio::put_f64(bytes, v);
    binio::write_file(path, bytes);
}

std::vector<double> parse_alphas(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("invalid alpha list entry '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("empty alpha list");
    return out;
}

std::vector<Method> parse_methods(const std::string& csv) {
    std::vector<Method> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_method(item));
    if (out.empty()) throw UsageError("empty method list");
    return out;
}

struct CommonRunOptions {
    std::string config_path;
    std::string weights_path;
    std::string method;
    std::string tta;
    std::optional<Seed> seed;
    std::optional<std::size_t> workers;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Flat key = value configuration file");
        cmd->add_option("--weights", weights_path, "PRWT archive for the CNN denoiser");
        cmd->add_option("--tta", tta, "Test-time augmentation: none, flip or d4");
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--workers", workers, "Worker threads (default: PRFORGE_WORKERS or all cores)");
    }

    /// File values first, then flags.
    RunConfig build(bool with_method) const {
        RunConfig run;
        if (!config_path.empty()) {
            require_file(config_path, "config file");
            run = load_config(config_path);
        }
        if (with_method && !method.empty()) run.method = parse_method(method);
        if (!tta.empty()) run.tta = parse_tta_mode(tta);
        if (seed) run.seed = *seed;
        if (workers) run.workers = *workers;
        if (!weights_path.empty()) run.weights = weights_path;
        return run;
    }
};

std::optional<WeightsArchive> load_weights_for(const RunConfig& run) {
    if (run.weights) {
        require_file(*run.weights, "weights file");
        return load_weights(*run.weights);
    }
    if (run.needs_weights()) throw ConfigError("denoiser 'cnn' requires --weights");
    return std::nullopt;
}

int cmd_simulate(const std::string& input, double alpha, Seed seed, const std::string& out) {
    require_file(input, "input image");
    const ImageReal img = read_png(input);
    const FourierOp op(img.height(), img.width());
    const Measurement meas = simulate(op, img, alpha, seed);
    save_measurement(out, meas);
    std::cout << "snr_db," << format_metric(snr_db(op, img, meas)) << '\n';
    return 0;
}

int cmd_reconstruct(const std::string& meas_path, const CommonRunOptions& opts, const std::string& out,
                    const std::string& trace_path, const std::string& truth_path, const std::string& dump_init) {
    require_file(meas_path, "measurement file");
    const RunConfig run = opts.build(true);
    const auto weights = load_weights_for(run);
    const Measurement meas = load_measurement(meas_path);
    std::optional<ImageReal> truth;
    if (!truth_path.empty()) {
        require_file(truth_path, "truth image");
        truth = read_png(truth_path);
    }
    const FourierOp op(meas.height, meas.width);
    const auto result = reconstruct(op, meas, run, resolve_workers(run.workers), weights ? &*weights : nullptr,
                                    truth ? &*truth : nullptr);
    if (!result.aggregate.all_finite()) {
        std::cerr << "error: reconstruction produced non-finite values\n";
        return 1;
    }
    write_png(out, result.aggregate);
    if (!trace_path.empty()) write_trace_csv(trace_path, result);
    if (!dump_init.empty()) write_init_dump(dump_init, result);
    std::cout << "residual," << format_real(residual(op, result.aggregate, meas)) << '\n';
    return 0;
}

int cmd_evaluate(const std::string& recon_path, const std::string& truth_path, bool no_flip) {
    require_file(recon_path, "reconstruction image");
    require_file(truth_path, "truth image");
    const ImageReal recon = read_png(recon_path);
    const ImageReal truth = read_png(truth_path);
    if (!recon.same_shape(truth)) throw UsageError("reconstruction and truth differ in size");
    MetricReport report;
    if (no_flip) {
        report = evaluate_pair(recon, truth);
    } else {
        report = resolve_conjugate_flip(recon, truth).report;
    }
    std::cout << format_metric(report.psnr_db) << ',' << format_metric(report.ssim) << ','
              << (report.resolved_flip ? "true" : "false") << '\n';
    return 0;
}

int cmd_benchmark(const std::string& dir, const std::string& alphas, std::size_t runs, const std::string& methods,
                  const CommonRunOptions& opts, const std::string& out) {
    if (!fs::is_directory(dir)) throw UsageError("image directory not found: " + dir);
    BenchmarkConfig cfg;
    cfg.image_dir = dir;
    cfg.alphas = parse_alphas(alphas);
    cfg.runs = runs;
    cfg.methods = parse_methods(methods);
    cfg.run = opts.build(false);
    cfg.master_seed = cfg.run.seed.value_or(0);
    cfg.workers = resolve_workers(cfg.run.workers);
    const auto weights = load_weights_for(cfg.run);
    cfg.weights = weights ? &*weights : nullptr;
    const auto result = benchmark(cfg);

    std::ofstream rows(out);
    if (!rows) throw std::runtime_error("cannot write " + out);
    write_benchmark_csv(rows, result.rows);
    const fs::path base = fs::path(out).replace_extension();
    std::ofstream summary(base.string() + ".summary.csv");
    write_summary_csv(summary, result.summary);
    std::ofstream hist(base.string() + ".hist.csv");
    write_histogram_csv(hist, result.histograms);

    write_summary_csv(std::cout, result.summary);
    for (const auto& s : result.skipped) std::cerr << "skipped: " << s << '\n';
    std::cout << "errors," << result.skipped.size() << '\n';
    return result.had_errors() ? 1 : 0;
}

int cmd_weights(const std::string& init, Seed seed, std::size_t lambda_t, const std::string& out) {
    WeightsArchive w;
    if (init == "zero") w = make_zero_weights();
    else if (init == "random") w = make_random_weights(seed);
    else throw UsageError("unknown weights init '" + init + "' (expected zero or random)");
    if (lambda_t > 0) w.lambda = default_schedule(lambda_t).values();
    save_weights(out, w);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prforge: phase retrieval from oversampled Fourier magnitudes"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Simulate noisy Fourier intensities of a PNG image");
    std::string sim_input, sim_out;
    double sim_alpha = 3.0;
    Seed sim_seed = 0;
    sim->add_option("--input", sim_input, "Grayscale PNG")->required();
    sim->add_option("--alpha", sim_alpha, "Noise strength")->check(CLI::NonNegativeNumber);
    sim->add_option("--seed", sim_seed, "Noise seed");
    sim->add_option("--out", sim_out, "Output PRM1 file")->required();

    auto* rec = app.add_subcommand("reconstruct", "Reconstruct an image from a PRM1 measurement");
    std::string rec_meas, rec_out, rec_trace, rec_truth, rec_dump;
    CommonRunOptions rec_opts;
    rec->add_option("--measurement", rec_meas, "PRM1 measurement file")->required();
    rec->add_option("--method", rec_opts.method, "hio, init, prnet-small or prnet-large");
    rec_opts.add_to(rec);
    rec->add_option("--out", rec_out, "Output PNG")->required();
    rec->add_option("--trace", rec_trace, "Per-iteration trace CSV");
    rec->add_option("--truth", rec_truth, "Ground-truth PNG for PSNR columns in the trace");
    rec->add_option("--dump-init", rec_dump, "Raw float64 dump of the warm starts");

    auto* ev = app.add_subcommand("evaluate", "PSNR / SSIM of a reconstruction against the truth");
    std::string ev_recon, ev_truth;
    bool ev_no_flip = false;
    ev->add_option("--recon", ev_recon, "Reconstruction PNG")->required();
    ev->add_option("--truth", ev_truth, "Ground-truth PNG")->required();
    ev->add_flag("--no-flip-resolve", ev_no_flip, "Skip the 180-degree ambiguity check");

    auto* bench = app.add_subcommand("benchmark", "Monte Carlo benchmark over a directory of PNGs");
    std::string b_dir, b_alphas = "2,3,4", b_methods = "hio,init,prnet-small", b_out;
    std::size_t b_runs = 5;
    CommonRunOptions b_opts;
    bench->add_option("--dir", b_dir, "Directory of grayscale PNGs")->required();
    bench->add_option("--alphas", b_alphas, "Comma-separated noise strengths");
    bench->add_option("--runs", b_runs, "Monte Carlo runs per image and alpha")->check(CLI::PositiveNumber);
    bench->add_option("--methods", b_methods, "Comma-separated methods");
    b_opts.add_to(bench);
    bench->add_option("--out", b_out, "Per-row CSV (summary and histogram sidecars alongside)")->required();

    auto* wt = app.add_subcommand("weights", "Write a PRWT archive with zero or random weights");
    std::string w_init = "zero", w_out;
    Seed w_seed = 0;
    std::size_t w_lambda = 0;
    wt->add_option("--init", w_init, "zero or random");
    wt->add_option("--seed", w_seed, "Seed for random weights");
    wt->add_option("--lambda-steps", w_lambda, "Also store a default lambda schedule of this length");
    wt->add_option("--out", w_out, "Output PRWT file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sim) return cmd_simulate(sim_input, sim_alpha, sim_seed, sim_out);
        if (*rec) return cmd_reconstruct(rec_meas, rec_opts, rec_out, rec_trace, rec_truth, rec_dump);
        if (*ev) return cmd_evaluate(ev_recon, ev_truth, ev_no_flip);
        if (*bench) return cmd_benchmark(b_dir, b_alphas, b_runs, b_methods, b_opts, b_out);
        if (*wt) return cmd_weights(w_init, w_seed, w_lambda, w_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
