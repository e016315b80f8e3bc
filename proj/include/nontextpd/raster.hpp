#pragma once

#include "error.hpp"

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace nontextpd {

/// 8-bit grayscale image, row-major.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    Raster() = default;
    Raster(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {}

    std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

    bool empty() const noexcept { return width == 0 || height == 0; }
    friend bool operator==(const Raster&, const Raster&) = default;
};

namespace detail {

inline void skip_pgm_space(std::istream& in) {
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            in.get();
        } else {
            return;
        }
    }
}

inline std::size_t read_pgm_number(std::istream& in) {
    skip_pgm_space(in);
    std::size_t v = 0;
    if (!(in >> v)) throw Error(ErrorCode::io_error, "malformed PGM header");
    return v;
}

} // namespace detail

/// Parses binary (P5) or ASCII (P2) PGM data with maxval <= 255.
inline Raster parse_pgm(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (!in || (magic != "P5" && magic != "P2")) throw Error(ErrorCode::io_error, "not a PGM (P5/P2) image");
    const auto w = detail::read_pgm_number(in);
    const auto h = detail::read_pgm_number(in);
    const auto maxval = detail::read_pgm_number(in);
    if (w == 0 || h == 0 || maxval == 0 || maxval > 255)
        throw Error(ErrorCode::io_error, "unsupported PGM dimensions or maxval");
    Raster r(w, h);
    if (magic == "P5") {
        in.get(); // single whitespace after maxval
        in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
        if (in.gcount() != static_cast<std::streamsize>(r.pixels.size()))
            throw Error(ErrorCode::io_error, "truncated PGM raster");
    } else {
        for (auto& p : r.pixels) {
            const auto v = detail::read_pgm_number(in);
            if (v > maxval) throw Error(ErrorCode::io_error, "PGM sample exceeds maxval");
            p = static_cast<std::uint8_t>(v);
        }
    }
    if (maxval != 255) {
        for (auto& p : r.pixels) p = static_cast<std::uint8_t>((p * 255u + maxval / 2) / maxval);
    }
    return r;
}

inline Raster read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_pgm(ss.str());
}

inline std::string encode_pgm(const Raster& r) {
    std::string out = "P5\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(r.pixels.data()), r.pixels.size());
    return out;
}

inline void write_pgm(const std::string& path, const Raster& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
    const auto bytes = encode_pgm(r);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

} // namespace nontextpd
