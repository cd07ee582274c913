#pragma once

// Monte Carlo benchmark over a directory of grayscale PNGs: simulate noisy
// measurements per (image, alpha, run), reconstruct with each method, resolve
// the conjugate-flip ambiguity, and tabulate PSNR / SSIM / residual / runtime.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "prforge/metrics.hpp"
#include "prforge/parallel.hpp"
#include "prforge/png_io.hpp"
#include "prforge/reconstruct.hpp"

namespace prforge {

struct BenchmarkConfig {
    std::filesystem::path image_dir;
    std::vector<double> alphas = {2.0, 3.0, 4.0};
    std::size_t runs = 5;
    std::vector<Method> methods = {Method::hio, Method::init, Method::prnet_small};
    Seed master_seed = 0;
    RunConfig run;  ///< shared settings; method and seed are set per row
    std::size_t workers = 1;
    std::size_t histogram_bins = 40;
    const WeightsArchive* weights = nullptr;
};

struct BenchmarkRow {
    std::string image;
    double alpha = 0.0;
    std::size_t run = 0;
    Method method = Method::hio;
    TtaMode tta = TtaMode::none;
    double psnr_db = 0.0;
    double ssim = 0.0;
    bool flip_resolved = false;
    double residual = 0.0;
    double runtime_s = 0.0;
};

struct SummaryRow {
    Method method;
    TtaMode tta;
    double alpha;
    std::size_t count = 0;
    double mean_psnr_db = 0.0;
    double mean_ssim = 0.0;
    double mean_runtime_s = 0.0;
};

struct HistogramRow {
    std::string metric;
    double bin_lo = 0.0;
    double bin_hi = 0.0;
    std::size_t count = 0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    std::vector<SummaryRow> summary;
    std::vector<HistogramRow> histograms;
    std::vector<std::string> skipped;  ///< unreadable inputs with reasons
    [[nodiscard]] bool had_errors() const noexcept { return !skipped.empty(); }
};

/// FNV-1a over the file name, mixed with master seed, alpha bits and run.
inline Seed benchmark_seed(Seed master, const std::string& image, double alpha, std::size_t run) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : image) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    Seed s = derive_seed(master, h);
    s = derive_seed(s, std::bit_cast<std::uint64_t>(alpha));
    return derive_seed(s, run);
}

/// `%.17g`, with "inf" / "-inf" / "nan" spelled out.
inline std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<HistogramRow> histogram(const std::string& metric, const std::vector<double>& values,
                                           std::size_t bins) {
    std::vector<double> finite;
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    if (finite.empty() || bins == 0) return {};
    const auto [mn, mx] = std::minmax_element(finite.begin(), finite.end());
    const double lo = *mn;
    const double width = (*mx - lo) / static_cast<double>(bins);
    std::vector<HistogramRow> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].metric = metric;
        out[b].bin_lo = lo + width * static_cast<double>(b);
        out[b].bin_hi = b + 1 == bins ? *mx : lo + width * static_cast<double>(b + 1);
    }
    for (double v : finite) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
        out[std::min(b, bins - 1)].count++;
    }
    return out;
}

inline BenchmarkResult benchmark(const BenchmarkConfig& cfg) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(cfg.image_dir)) throw std::runtime_error("benchmark: not a directory: " + cfg.image_dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cfg.image_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("benchmark: no PNG images in " + cfg.image_dir.string());

    BenchmarkResult result;
    std::vector<std::pair<std::string, ImageReal>> images;
    for (const auto& f : files) {
        try {
            images.emplace_back(f.filename().string(), read_png(f));
        } catch (const std::exception& e) {
            result.skipped.push_back(f.filename().string() + ": " + e.what());
        }
    }

    struct Task {
        std::size_t image;
        double alpha;
        std::size_t run;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < images.size(); ++i)
        for (double a : cfg.alphas)
            for (std::size_t r = 0; r < cfg.runs; ++r) tasks.push_back({i, a, r});

    std::vector<std::vector<BenchmarkRow>> per_task(tasks.size());
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t t) {
        const auto& task = tasks[t];
        const auto& [name, truth] = images[task.image];
        const FourierOp op(truth.height(), truth.width());
        const Seed seed = benchmark_seed(cfg.master_seed, name, task.alpha, task.run);
        const Measurement meas = simulate(op, truth, task.alpha, seed);
        for (Method m : cfg.methods) {
            RunConfig run = cfg.run;
            run.method = m;
            run.seed = seed;
            const auto start = std::chrono::steady_clock::now();
            const auto rec = reconstruct(op, meas, run, 1, cfg.weights);
            const auto stop = std::chrono::steady_clock::now();
            const auto oriented = resolve_conjugate_flip(rec.aggregate, truth);
            BenchmarkRow row;
            row.image = name;
            row.alpha = task.alpha;
            row.run = task.run;
            row.method = m;
            row.tta = m == Method::hio || m == Method::init ? TtaMode::none : run.tta_mode();
            row.psnr_db = oriented.report.psnr_db;
            row.ssim = oriented.report.ssim;
            row.flip_resolved = oriented.report.resolved_flip;
            row.residual = residual(op, oriented.image, meas);
            row.runtime_s = std::chrono::duration<double>(stop - start).count();
            per_task[t].push_back(row);
        }
    });
    for (auto& rows : per_task)
        for (auto& r : rows) result.rows.push_back(std::move(r));
    std::stable_sort(result.rows.begin(), result.rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
        return std::tie(a.image, a.alpha, a.run, a.method) < std::tie(b.image, b.alpha, b.run, b.method);
    });

    std::map<std::tuple<Method, TtaMode, double>, std::vector<const BenchmarkRow*>> groups;
    for (const auto& r : result.rows) groups[{r.method, r.tta, r.alpha}].push_back(&r);
    for (const auto& [key, rows] : groups) {
        SummaryRow s{std::get<0>(key), std::get<1>(key), std::get<2>(key)};
        s.count = rows.size();
        std::vector<double> psnrs, ssims;
        for (const auto* r : rows) {
            s.mean_psnr_db += r->psnr_db;
            s.mean_ssim += r->ssim;
            s.mean_runtime_s += r->runtime_s;
            psnrs.push_back(r->psnr_db);
            ssims.push_back(r->ssim);
        }
        const double n = static_cast<double>(rows.size());
        s.mean_psnr_db /= n;
        s.mean_ssim /= n;
        s.mean_runtime_s /= n;
        result.summary.push_back(s);
        const std::string prefix = std::string(to_string(s.method)) + ":" + format_real(s.alpha) + ":";
        for (auto& h : histogram(prefix + "psnr_db", psnrs, cfg.histogram_bins)) result.histograms.push_back(h);
        for (auto& h : histogram(prefix + "ssim", ssims, cfg.histogram_bins)) result.histograms.push_back(h);
    }
    return result;
}

inline constexpr std::string_view kBenchmarkCsvHeader =
    "image,alpha,run,method,tta,psnr_db,ssim,flip_resolved,residual,runtime_s";

inline void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
    out << kBenchmarkCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.image << ',' << format_real(r.alpha) << ',' << r.run << ',' << to_string(r.method) << ','
            << to_string(r.tta) << ',' << format_real(r.psnr_db) << ',' << format_real(r.ssim) << ','
            << (r.flip_resolved ? "true" : "false") << ',' << format_real(r.residual) << ','
            << format_real(r.runtime_s) << '\n';
    }
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "method,tta,alpha,count,mean_psnr_db,mean_ssim,mean_runtime_s\n";
    for (const auto& s : rows) {
        out << to_string(s.method) << ',' << to_string(s.tta) << ',' << format_real(s.alpha) << ',' << s.count << ','
            << format_real(s.mean_psnr_db) << ',' << format_real(s.mean_ssim) << ',' << format_real(s.mean_runtime_s)
            << '\n';
    }
}

inline void write_histogram_csv(std::ostream& out, const std::vector<HistogramRow>& rows) {
    out << "metric,bin_lo,bin_hi,count\n";
    for (const auto& h : rows)
        out << h.metric << ',' << format_real(h.bin_lo) << ',' << format_real(h.bin_hi) << ',' << h.count << '\n';
}

}  // namespace prforge
