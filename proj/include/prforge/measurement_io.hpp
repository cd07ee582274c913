#pragma once

// PRM1 measurement files:
//   "PRM1\0\0\0\0" | u64 LE header length | JSON header | arrays
// The header is {"h","w","alpha","seed","fields"}; each named field is a
// 2H x 2W row-major array of little-endian float64 in header order.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "prforge/binary_io.hpp"
#include "prforge/fourier.hpp"

namespace prforge {

inline constexpr binio::Magic kMeasurementMagic = {'P', 'R', 'M', '1', 0, 0, 0, 0};

inline binio::Bytes encode_measurement(const Measurement& m) {
    nlohmann::json header;
    header["h"] = m.height;
    header["w"] = m.width;
    header["alpha"] = m.alpha;
    header["seed"] = m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr);
    header["fields"] = {"intensities", "magnitudes"};
    auto out = binio::begin_container(kMeasurementMagic, header.dump());
    out.reserve(out.size() + 16 * m.intensities.size());
    for (double v : m.intensities) binio::put_f64(out, v);
    for (double v : m.magnitudes) binio::put_f64(out, v);
    return out;
}

inline Measurement decode_measurement(std::span<const std::uint8_t> bytes) {
    const auto c = binio::open_container(bytes, kMeasurementMagic, 4, "PRM1");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(c.header);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("PRM1: malformed header: ") + e.what());
    }
    Measurement m;
    try {
        m.height = header.at("h").get<std::size_t>();
        m.width = header.at("w").get<std::size_t>();
        m.alpha = header.at("alpha").get<double>();
        if (header.contains("seed") && !header["seed"].is_null()) m.seed = header["seed"].get<Seed>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("PRM1: bad header field: ") + e.what());
    }
    const std::size_t n = 4 * m.height * m.width;
    const auto fields = header.value("fields", nlohmann::json::array());
    std::size_t offset = c.payload_offset;
    bool have_intensities = false;
    bool have_magnitudes = false;
    for (const auto& f : fields) {
        const auto name = f.get<std::string>();
        if (bytes.size() - offset < 8 * n) throw TruncatedBlobError("PRM1: truncated field " + name);
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = binio::get_f64(bytes.data() + offset + 8 * i);
        offset += 8 * n;
        if (name == "intensities") {
            m.intensities = std::move(values);
            have_intensities = true;
        } else if (name == "magnitudes") {
            m.magnitudes = std::move(values);
            have_magnitudes = true;
        } else {
            throw FormatError("PRM1: unknown field " + name);
        }
    }
    if (offset != bytes.size()) throw FormatError("PRM1: trailing bytes after payload");
    if (!have_intensities) throw FormatError("PRM1: missing intensities");
    if (!have_magnitudes) {
        m = Measurement::from_intensities(m.height, m.width, m.alpha, std::move(m.intensities), m.seed);
    }
    return m;
}

inline void save_measurement(const std::filesystem::path& path, const Measurement& m) {
    binio::write_file(path, encode_measurement(m));
}

inline Measurement load_measurement(const std::filesystem::path& path) {
    return decode_measurement(binio::read_file(path));
}

}  // namespace prforge
