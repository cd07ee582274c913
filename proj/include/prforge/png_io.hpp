#pragma once

// Grayscale PNG reading and writing through libpng. 8-bit samples map to
// [0, 255] directly; 16-bit samples are rescaled by 255/65535. Writing clamps
// to [0, 255] and rounds half to even.

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "prforge/errors.hpp"
#include "prforge/image.hpp"

namespace prforge {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void png_error_handler(png_structp png, png_const_charp msg) {
    auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
    if (buf) *buf = msg;
    png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

}  // namespace detail

/// Pixel value stored for a real sample: clamp to [0, 255], round half to even.
inline std::uint8_t quantize_pixel(double v) noexcept {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    if (v >= 255.0) return 255;
    double r = std::floor(v);
    const double frac = v - r;
    if (frac > 0.5 || (frac == 0.5 && std::fmod(r, 2.0) != 0.0)) r += 1.0;
    return static_cast<std::uint8_t>(r);
}

inline ImageReal read_png(const std::filesystem::path& path) {
    detail::FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw std::runtime_error("cannot open " + path.string());

    std::string error;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, detail::png_error_handler,
                                             detail::png_warning_handler);
    if (!png) throw std::runtime_error("libpng: cannot create read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("libpng: cannot create info struct");
    }

    std::vector<png_byte> raw;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
    volatile bool unsupported_color = false;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("PNG " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
        png_read_update_info(png, info);
        bit_depth = png_get_bit_depth(png, info);
        const std::size_t rowbytes = png_get_rowbytes(png, info);
        raw.resize(rowbytes * height);
        rows.resize(height);
        for (png_uint_32 r = 0; r < height; ++r) rows[r] = raw.data() + r * rowbytes;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    } else {
        unsupported_color = true;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (unsupported_color) throw FormatError("PNG " + path.string() + ": only grayscale images are supported");

    ImageReal img(height, width);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            if (bit_depth == 16) {
                const png_bytep p = rows[r] + 2 * c;
                const unsigned v = (static_cast<unsigned>(p[0]) << 8) | p[1];
                img(r, c) = static_cast<double>(v) * 255.0 / 65535.0;
            } else {
                img(r, c) = rows[r][c];
            }
        }
    }
    return img;
}

/// Writes an 8-bit grayscale PNG.
inline void write_png(const std::filesystem::path& path, const ImageReal& img) {
    std::vector<png_byte> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) raw[i] = quantize_pixel(img[i]);
    std::vector<png_bytep> rows(img.height());
    for (std::size_t r = 0; r < img.height(); ++r) rows[r] = raw.data() + r * img.width();

    detail::FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw std::runtime_error("cannot write " + path.string());
    std::string error;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, detail::png_error_handler,
                                              detail::png_warning_handler);
    if (!png) throw std::runtime_error("libpng: cannot create write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng: cannot create info struct");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG write " + path.string() + ": " + error);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace prforge
