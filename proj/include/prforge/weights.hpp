#pragma once

// PRWT weight archives for the residual CNN denoiser.
//
//   "PRWT\0\0\0\1" | u64 LE header length | JSON header | float32 LE blobs
//
// Header: {"version": 1,
//          "arch": [{"name", "shape", "activation"}, ...],
//          "extras": {"lambda": [...]}}            (extras optional)
// Tensors follow in arch order, each product(shape) float32 values. Conv
// weights use [out, in, 3, 3] layout; every tensor of a layer carries that
// layer's activation tag ("relu" or "none").

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prforge/binary_io.hpp"
#include "prforge/rng.hpp"

namespace prforge {

inline constexpr binio::Magic kWeightsMagic = {'P', 'R', 'W', 'T', 0, 0, 0, 1};
inline constexpr int kWeightsVersion = 1;

struct TensorSpec {
    std::string name;
    std::vector<std::size_t> shape;
    std::string activation;

    [[nodiscard]] std::size_t element_count() const noexcept {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
    friend bool operator==(const TensorSpec&, const TensorSpec&) = default;
};

namespace cnn_arch {
inline constexpr std::size_t kInputChannels = 2;
inline constexpr std::size_t kHiddenChannels = 32;
inline constexpr std::size_t kHiddenLayers = 4;
inline constexpr std::size_t kConvLayers = kHiddenLayers + 2;
}  // namespace cnn_arch

/// conv3x3(2->32)+ReLU, 4 x [conv3x3(32->32)+ReLU], conv3x3(32->1).
inline std::vector<TensorSpec> residual_cnn_architecture() {
    using namespace cnn_arch;
    std::vector<TensorSpec> arch;
    for (std::size_t l = 0; l < kConvLayers; ++l) {
        const std::size_t in = l == 0 ? kInputChannels : kHiddenChannels;
        const std::size_t out = l + 1 == kConvLayers ? 1 : kHiddenChannels;
        const std::string act = l + 1 == kConvLayers ? "none" : "relu";
        const std::string base = "conv" + std::to_string(l);
        arch.push_back({base + ".weight", {out, in, 3, 3}, act});
        arch.push_back({base + ".bias", {out}, act});
    }
    return arch;
}

struct WeightsArchive {
    int version = kWeightsVersion;
    std::vector<TensorSpec> arch;
    std::vector<std::vector<float>> tensors;
    std::optional<std::vector<double>> lambda;

    friend bool operator==(const WeightsArchive&, const WeightsArchive&) = default;
};

/// Throws ShapeMismatchError unless the archive matches the fixed network.
inline void validate_architecture(const WeightsArchive& w) {
    const auto expected = residual_cnn_architecture();
    if (w.arch.size() != expected.size())
        throw ShapeMismatchError("PRWT: expected " + std::to_string(expected.size()) + " tensors, got " +
                                 std::to_string(w.arch.size()));
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (!(w.arch[i] == expected[i])) throw ShapeMismatchError("PRWT: tensor " + w.arch[i].name + " does not match architecture");
        if (i < w.tensors.size() && w.tensors[i].size() != expected[i].element_count())
            throw ShapeMismatchError("PRWT: tensor " + w.arch[i].name + " has wrong element count");
    }
    if (w.tensors.size() != expected.size()) throw ShapeMismatchError("PRWT: tensor count mismatch");
}

inline WeightsArchive make_zero_weights() {
    WeightsArchive w;
    w.arch = residual_cnn_architecture();
    for (const auto& spec : w.arch) w.tensors.emplace_back(spec.element_count(), 0.0f);
    return w;
}

/// He-style uniform initialisation; deterministic in `seed`.
inline WeightsArchive make_random_weights(Seed seed, double gain = 1.0) {
    WeightsArchive w;
    w.arch = residual_cnn_architecture();
    Rng rng(seed);
    for (const auto& spec : w.arch) {
        std::vector<float> t(spec.element_count());
        const std::size_t fan_in = spec.shape.size() == 4 ? spec.shape[1] * 9 : 1;
        const double bound = gain * std::sqrt(6.0 / static_cast<double>(fan_in)) * (spec.shape.size() == 4 ? 1.0 : 0.1);
        for (auto& v : t) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * bound);
        w.tensors.push_back(std::move(t));
    }
    return w;
}

inline binio::Bytes encode_weights(const WeightsArchive& w) {
    nlohmann::json header;
    header["version"] = w.version;
    header["arch"] = nlohmann::json::array();
    for (const auto& spec : w.arch)
        header["arch"].push_back({{"name", spec.name}, {"shape", spec.shape}, {"activation", spec.activation}});
    if (w.lambda) header["extras"]["lambda"] = *w.lambda;
    auto out = binio::begin_container(kWeightsMagic, header.dump());
    for (const auto& t : w.tensors)
        for (float v : t) binio::put_f32(out, v);
    return out;
}

inline WeightsArchive decode_weights(std::span<const std::uint8_t> bytes) {
    const auto c = binio::open_container(bytes, kWeightsMagic, 4, "PRWT");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(c.header);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("PRWT: malformed header: ") + e.what());
    }
    WeightsArchive w;
    try {
        w.version = header.at("version").get<int>();
        if (w.version != kWeightsVersion)
            throw VersionMismatchError("PRWT: unsupported header version " + std::to_string(w.version));
        for (const auto& entry : header.at("arch")) {
            w.arch.push_back({entry.at("name").get<std::string>(), entry.at("shape").get<std::vector<std::size_t>>(),
                              entry.at("activation").get<std::string>()});
        }
        if (header.contains("extras") && header["extras"].contains("lambda"))
            w.lambda = header["extras"]["lambda"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("PRWT: bad header field: ") + e.what());
    }
    std::size_t offset = c.payload_offset;
    for (const auto& spec : w.arch) {
        const std::size_t n = spec.element_count();
        if ((bytes.size() - offset) / 4 < n) throw TruncatedBlobError("PRWT: truncated blob for tensor " + spec.name);
        std::vector<float> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = binio::get_f32(bytes.data() + offset + 4 * i);
        offset += 4 * n;
        w.tensors.push_back(std::move(t));
    }
    if (offset != bytes.size()) throw FormatError("PRWT: trailing bytes after last tensor");
    validate_architecture(w);
    if (w.lambda) {
        for (double l : *w.lambda)
            if (!(l > 0.0 && l <= 1.0)) throw FormatError("PRWT: lambda entries must lie in (0, 1]");
    }
    return w;
}

inline void save_weights(const std::filesystem::path& path, const WeightsArchive& w) {
    validate_architecture(w);
    binio::write_file(path, encode_weights(w));
}

inline WeightsArchive load_weights(const std::filesystem::path& path) { return decode_weights(binio::read_file(path)); }

}  // namespace prforge
