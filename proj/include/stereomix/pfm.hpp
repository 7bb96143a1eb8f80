#pragma once

#include <string>
#include <vector>

namespace smx {

// Single-channel float image; row 0 is the top row in memory. PFM files store
// rows bottom-to-top with an endianness-signed scale line; both orders and
// endiannesses are handled on read.
struct FloatImage {
    int width = 0, height = 0;
    std::vector<float> data;

    FloatImage() = default;
    FloatImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}
    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
};

// Grayscale "Pf" only; color "PF" is rejected. Throws FormatError naming the
// byte offset on truncated payloads.
FloatImage pfm_read(const std::string& path);

// Bitwise round trip: pfm_read(pfm_write(f)) == f. big_endian selects the
// payload byte order (scale line -1 = little, +1 = big).
void pfm_write(const std::string& path, const FloatImage& img, bool big_endian = false);

} // namespace smx
