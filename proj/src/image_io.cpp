#include "stereomix/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include <png.h>

#include "stereomix/common.hpp"

namespace smx {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t quantize(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace

void png_write_rgb8(const std::string& path, const Tensor& img) {
    if (img.channels != 3) throw ShapeError("png writer expects an RGB tensor");
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot open '" + path + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng write failed for '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double* p = img.row_ptr(x, y);
            for (int c = 0; c < 3; ++c) row[static_cast<size_t>(x) * 3 + c] = quantize(p[c]);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Tensor png_read_rgb8(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open '" + path + "' for reading");

    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw FormatError("'" + path + "' is not a png file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("libpng failed to decode '" + path + "'");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize whatever we get to 8-bit RGB.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    Tensor img(w, h, 3);
    std::vector<uint8_t> row(static_cast<size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) {
            double* p = img.row_ptr(x, y);
            for (int c = 0; c < 3; ++c)
                p[c] = row[static_cast<size_t>(x) * 3 + c] / 255.0;
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Tensor colorize(const std::vector<double>& values, int width, int height, double lo,
                double hi) {
    if (values.size() != static_cast<size_t>(width) * height)
        throw ShapeError("colorize value count disagrees with the resolution");
    const double span = hi > lo ? hi - lo : 1.0;
    Tensor img(width, height, 3);
    for (size_t i = 0; i < values.size(); ++i) {
        const double t = std::clamp((values[i] - lo) / span, 0.0, 1.0);
        // jet: blue -> cyan -> yellow -> red
        const double r = std::clamp(1.5 - std::abs(4.0 * t - 3.0), 0.0, 1.0);
        const double g = std::clamp(1.5 - std::abs(4.0 * t - 2.0), 0.0, 1.0);
        const double b = std::clamp(1.5 - std::abs(4.0 * t - 1.0), 0.0, 1.0);
        img.data[i * 3 + 0] = r;
        img.data[i * 3 + 1] = g;
        img.data[i * 3 + 2] = b;
    }
    return img;
}

} // namespace smx
