#pragma once

// Little-endian primitives shared by the PRM1 and PRWT container formats:
// an 8-byte magic, a u64 little-endian byte length, a UTF-8 JSON header of
// that length, then raw little-endian payload arrays.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prforge/errors.hpp"

namespace prforge::binio {

using Bytes = std::vector<std::uint8_t>;
using Magic = std::array<std::uint8_t, 8>;

inline void put_u64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(Bytes& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_f32(Bytes& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

inline double get_f64(const std::uint8_t* p) { return std::bit_cast<double>(get_u64(p)); }
inline float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Magic plus length-prefixed header.
inline Bytes begin_container(const Magic& magic, std::string_view header) {
    Bytes out(magic.begin(), magic.end());
    put_u64(out, header.size());
    out.insert(out.end(), header.begin(), header.end());
    return out;
}

struct Container {
    std::string header;
    std::size_t payload_offset = 0;
};

/// Validates magic (prefix `family` plus full match) and splits off the header.
/// A mismatch in the trailing magic bytes is reported as a version mismatch.
inline Container open_container(std::span<const std::uint8_t> bytes, const Magic& magic, std::size_t family_len,
                                std::string_view what) {
    if (bytes.size() < magic.size() || std::memcmp(bytes.data(), magic.data(), family_len) != 0) {
        throw BadMagicError(std::string(what) + ": bad magic");
    }
    if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
        throw VersionMismatchError(std::string(what) + ": unsupported container version");
    }
    if (bytes.size() < 16) throw TruncatedBlobError(std::string(what) + ": truncated header length");
    const std::uint64_t len = get_u64(bytes.data() + 8);
    if (len > bytes.size() - 16) throw TruncatedBlobError(std::string(what) + ": truncated header");
    Container c;
    c.header.assign(reinterpret_cast<const char*>(bytes.data() + 16), static_cast<std::size_t>(len));
    c.payload_offset = 16 + static_cast<std::size_t>(len);
    return c;
}

}  // namespace prforge::binio
