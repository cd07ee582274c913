#pragma once

// Run configuration: a flat "key = value" file (a TOML subset: comments with
// '#', quoted or bare strings, integers, floats, true/false; no tables).
// Every key is optional; missing keys fall back to the method's preset.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "prforge/errors.hpp"
#include "prforge/langevin.hpp"
#include "prforge/tta.hpp"
#include "prforge/weights.hpp"

namespace prforge {

enum class Method { hio, init, prnet_small, prnet_large };

inline constexpr std::string_view kMethodNames = "hio, init, prnet-small, prnet-large";

inline Method parse_method(std::string_view s) {
    if (s == "hio") return Method::hio;
    if (s == "init") return Method::init;
    if (s == "prnet-small") return Method::prnet_small;
    if (s == "prnet-large") return Method::prnet_large;
    throw ConfigError("unknown method '" + std::string(s) + "' (valid methods: " + std::string(kMethodNames) + ")");
}

inline constexpr std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::hio: return "hio";
        case Method::init: return "init";
        case Method::prnet_small: return "prnet-small";
        case Method::prnet_large: return "prnet-large";
    }
    return "?";
}

enum class DenoiserKind { identity, gaussian, cnn };

inline DenoiserKind parse_denoiser_kind(std::string_view s) {
    if (s == "identity") return DenoiserKind::identity;
    if (s == "gaussian") return DenoiserKind::gaussian;
    if (s == "cnn") return DenoiserKind::cnn;
    throw ConfigError("unknown denoiser '" + std::string(s) + "' (expected identity, gaussian or cnn)");
}

/// Every user-settable option; unset fields take preset values in resolve().
struct RunConfig {
    Method method = Method::prnet_small;
    std::optional<Seed> seed;
    std::optional<std::size_t> T, K, chains, num_starts, short_iters, long_iters, hio_iters, workers;
    std::optional<double> beta, kappa, lambda_max, lambda_min, initial_sigma;
    std::optional<bool> enforce_support, enforce_nonneg, align_orientation;
    std::optional<DenoiserKind> denoiser;
    std::optional<TtaMode> tta;
    std::optional<std::filesystem::path> weights;

    /// Fields of `other` that are set override this one's.
    void merge(const RunConfig& other, bool take_method) {
        if (take_method) method = other.method;
        auto pick = [](auto& dst, const auto& src) {
            if (src) dst = src;
        };
        pick(seed, other.seed);
        pick(T, other.T);
        pick(K, other.K);
        pick(chains, other.chains);
        pick(num_starts, other.num_starts);
        pick(short_iters, other.short_iters);
        pick(long_iters, other.long_iters);
        pick(hio_iters, other.hio_iters);
        pick(workers, other.workers);
        pick(beta, other.beta);
        pick(kappa, other.kappa);
        pick(lambda_max, other.lambda_max);
        pick(lambda_min, other.lambda_min);
        pick(initial_sigma, other.initial_sigma);
        pick(enforce_support, other.enforce_support);
        pick(enforce_nonneg, other.enforce_nonneg);
        pick(align_orientation, other.align_orientation);
        pick(denoiser, other.denoiser);
        pick(tta, other.tta);
        pick(weights, other.weights);
    }

    [[nodiscard]] std::size_t hio_iterations() const { return hio_iters.value_or(1000); }
    [[nodiscard]] TtaMode tta_mode() const { return tta.value_or(TtaMode::none); }
    [[nodiscard]] bool needs_weights() const { return denoiser.value_or(DenoiserKind::gaussian) == DenoiserKind::cnn; }

    /// Pipeline settings for `alpha`, with method presets under explicit values.
    /// `weights` must be supplied when the CNN denoiser is selected.
    [[nodiscard]] PipelineConfig resolve(double alpha, const WeightsArchive* loaded_weights = nullptr) const {
        PipelineConfig cfg = method == Method::prnet_large ? large_pipeline(alpha, seed.value_or(0))
                                                           : small_pipeline(alpha, seed.value_or(0));
        if (T) cfg.T = *T;
        if (K) cfg.K = *K;
        if (chains) cfg.chains = *chains;
        if (method == Method::init) cfg.chains = chains.value_or(1);
        if (num_starts) cfg.init.num_starts = *num_starts;
        if (short_iters) cfg.init.short_iters = *short_iters;
        if (long_iters) cfg.init.long_iters = *long_iters;
        if (beta) cfg.hio.beta = *beta;
        if (enforce_support) cfg.hio.enforce_support = *enforce_support;
        if (enforce_nonneg) cfg.hio.enforce_nonneg = *enforce_nonneg;
        if (align_orientation) cfg.align_orientation = *align_orientation;
        cfg.initial_sigma = initial_sigma;
        cfg.init.keep = cfg.chains;
        cfg.init.hio = cfg.hio;
        cfg.init.master_seed = cfg.master_seed;

        switch (denoiser.value_or(DenoiserKind::gaussian)) {
            case DenoiserKind::identity: cfg.denoiser = IdentityDenoiser{}; break;
            case DenoiserKind::gaussian: cfg.denoiser = GaussianBlurDenoiser{kappa.value_or(5.0)}; break;
            case DenoiserKind::cnn:
                if (!loaded_weights) throw ConfigError("denoiser 'cnn' requires a weights archive (--weights)");
                cfg.denoiser = make_cnn_denoiser(*loaded_weights);
                break;
        }
        if (loaded_weights && loaded_weights->lambda) {
            if (loaded_weights->lambda->size() != cfg.T)
                throw ConfigError("weights lambda schedule has length " +
                                  std::to_string(loaded_weights->lambda->size()) + " but T=" + std::to_string(cfg.T));
            cfg.schedule = LambdaSchedule(*loaded_weights->lambda);
        } else {
            cfg.schedule = default_schedule(cfg.T, lambda_max.value_or(1.0), lambda_min.value_or(0.01));
        }
        try {
            cfg.validate();
            cfg.init.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        return cfg;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string strip_comment(std::string_view line) {
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quotes = !in_quotes;
        if (line[i] == '#' && !in_quotes) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("config key '" + key + "': invalid number '" + value + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

}  // namespace detail

/// Applies one key to the config; throws ConfigError naming unknown keys.
inline void set_config_value(RunConfig& cfg, const std::string& key, std::string value) {
    using detail::parse_bool;
    using detail::parse_number;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    auto count = [&] {
        const auto v = parse_number<long long>(key, value);
        if (v < 1) throw ConfigError("config key '" + key + "': must be at least 1");
        return static_cast<std::size_t>(v);
    };
    if (key == "method") cfg.method = parse_method(value);
    else if (key == "seed") cfg.seed = parse_number<Seed>(key, value);
    else if (key == "T") cfg.T = count();
    else if (key == "K") cfg.K = count();
    else if (key == "chains") cfg.chains = count();
    else if (key == "num_starts") cfg.num_starts = count();
    else if (key == "short_iters") cfg.short_iters = count();
    else if (key == "long_iters") cfg.long_iters = count();
    else if (key == "hio_iters") cfg.hio_iters = count();
    else if (key == "workers") cfg.workers = count();
    else if (key == "beta") cfg.beta = parse_number<double>(key, value);
    else if (key == "kappa") cfg.kappa = parse_number<double>(key, value);
    else if (key == "lambda_max") cfg.lambda_max = parse_number<double>(key, value);
    else if (key == "lambda_min") cfg.lambda_min = parse_number<double>(key, value);
    else if (key == "initial_sigma") cfg.initial_sigma = parse_number<double>(key, value);
    else if (key == "enforce_support") cfg.enforce_support = parse_bool(key, value);
    else if (key == "enforce_nonneg") cfg.enforce_nonneg = parse_bool(key, value);
    else if (key == "align_orientation") cfg.align_orientation = parse_bool(key, value);
    else if (key == "denoiser") cfg.denoiser = parse_denoiser_kind(value);
    else if (key == "tta") cfg.tta = parse_tta_mode(value);
    else if (key == "weights") cfg.weights = std::filesystem::path(value);
    else throw ConfigError("unknown config key '" + key + "'");
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = detail::trim(detail::strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') throw ConfigError("config line " + std::to_string(lineno) + ": tables are not supported");
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        set_config_value(cfg, detail::trim(std::string_view(body).substr(0, eq)),
                         detail::trim(std::string_view(body).substr(eq + 1)));
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace prforge
