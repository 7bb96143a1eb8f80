#include "stereomix/pfm.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "stereomix/common.hpp"

namespace smx {

namespace {

constexpr bool kHostLittle = std::endian::native == std::endian::little;

uint32_t bswap32(uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}

// Reads one whitespace-terminated token; PFM headers are ASCII tokens
// separated by single whitespace characters.
std::string read_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
            if (tok.empty()) continue;
            break;
        }
        tok.push_back(c);
        if (tok.size() > 32) throw FormatError("pfm header token too long");
    }
    if (tok.empty()) throw FormatError("truncated pfm header");
    return tok;
}

long parse_dim(const std::string& tok) {
    size_t pos = 0;
    long v;
    try {
        v = std::stol(tok, &pos);
    } catch (const std::exception&) {
        throw FormatError("malformed pfm dimension '" + tok + "'");
    }
    if (pos != tok.size() || v < 1 || v > (1 << 24))
        throw FormatError("malformed pfm dimension '" + tok + "'");
    return v;
}

} // namespace

FloatImage pfm_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    char m0 = 0, m1 = 0, ws = 0;
    in.get(m0).get(m1).get(ws);
    if (!in || m0 != 'P') throw FormatError("not a pfm file (bad magic)");
    if (m1 == 'F') throw FormatError("color pfm ('PF') is not a disparity map");
    if (m1 != 'f') throw FormatError("not a pfm file (bad magic)");

    const long w = parse_dim(read_token(in));
    const long h = parse_dim(read_token(in));
    const std::string scale_tok = read_token(in);
    double scale;
    try {
        scale = std::stod(scale_tok);
    } catch (const std::exception&) {
        throw FormatError("malformed pfm scale '" + scale_tok + "'");
    }
    if (scale == 0.0) throw FormatError("pfm scale must be nonzero");
    const bool file_little = scale < 0.0;

    const std::streamoff payload_at = in.tellg();
    FloatImage img(static_cast<int>(w), static_cast<int>(h));
    std::vector<uint32_t> row(w);
    // Rows are stored bottom-to-top.
    for (long y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), w * 4);
        if (in.gcount() != w * 4) {
            const std::streamoff off = payload_at + static_cast<std::streamoff>(h - 1 - y) * w * 4 +
                                       in.gcount();
            throw FormatError("truncated pfm payload at byte " + std::to_string(off));
        }
        float* dst = &img.at(0, static_cast<int>(y));
        if (file_little == kHostLittle) {
            std::memcpy(dst, row.data(), w * 4);
        } else {
            for (long x = 0; x < w; ++x) {
                const uint32_t v = bswap32(row[x]);
                std::memcpy(dst + x, &v, 4);
            }
        }
    }
    return img;
}

void pfm_write(const std::string& path, const FloatImage& img, bool big_endian) {
    if (img.width < 1 || img.height < 1) throw ConfigError("cannot write an empty pfm");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    out << "Pf\n" << img.width << " " << img.height << "\n"
        << (big_endian ? "1.0" : "-1.0") << "\n";

    const bool swap = big_endian == kHostLittle;
    std::vector<uint32_t> row(img.width);
    for (int y = img.height - 1; y >= 0; --y) {
        std::memcpy(row.data(), &img.at(0, y), static_cast<size_t>(img.width) * 4);
        if (swap)
            for (uint32_t& v : row) v = bswap32(v);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(img.width) * 4);
    }
    if (!out) throw IoError("short write to '" + path + "'");
}

} // namespace smx
