// Copyright 2026 The Momir Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

namespace momir {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Square grayscale image with intensities in [0,1], row-major storage.
struct GrayImage {
    int side = 0;
    std::vector<double> pixels;  // side*side values
    std::string id;
    int class_label = 0;

    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * side + col]; }
    double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * side + col]; }

    static GrayImage filled(int side, double value, std::string id = {}, int class_label = 0) {
        GrayImage img;
        img.side = side;
        img.pixels.assign(static_cast<std::size_t>(side) * side, value);
        img.id = std::move(id);
        img.class_label = class_label;
        return img;
    }
};

namespace detail {

inline GrayImage from_bytes(const std::vector<std::uint8_t>& bytes, int width, int height,
                            const std::string& origin) {
    if (width != height)
        throw Error(origin + ": image is " + std::to_string(width) + "x" + std::to_string(height) +
                    ", only square images are supported");
    GrayImage img;
    img.side = width;
    img.pixels.resize(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = bytes[i] / 255.0;
    return img;
}

inline GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());

    auto next_token = [&in, &path]() -> std::string {
        std::string tok;
        int c;
        while ((c = in.get()) != EOF) {
            if (c == '#') {
                while ((c = in.get()) != EOF && c != '\n') {
                }
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
        if (tok.empty()) throw Error("truncated PGM header in " + path.string());
        return tok;
    };

    if (next_token() != "P5") throw Error(path.string() + " is not a binary (P5) PGM file");
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(next_token());
        height = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw Error("malformed PGM header in " + path.string());
    }
    if (width <= 0 || height <= 0) throw Error("bad PGM dimensions in " + path.string());
    if (maxval != 255) throw Error(path.string() + ": only 8-bit PGM (maxval 255) is supported");

    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw Error("truncated PGM pixel data in " + path.string());
    return from_bytes(bytes, width, height, path.string());
}

struct PngCloser {
    std::FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

inline GrayImage load_png(const std::filesystem::path& path) {
    PngCloser h;
    h.fp = std::fopen(path.string().c_str(), "rb");
    if (!h.fp) throw Error("cannot open " + path.string());

    png_byte header[8];
    if (std::fread(header, 1, 8, h.fp) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw Error(path.string() + " is not a PNG file");

    h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!h.png) throw Error("libpng initialization failed");
    h.info = png_create_info_struct(h.png);
    if (!h.info) throw Error("libpng initialization failed");

    // Everything libpng touches lives outside the setjmp region.
    int width = 0, height = 0;
    std::vector<std::uint8_t> bytes;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(h.png))) throw Error("corrupt PNG file " + path.string());

    png_init_io(h.png, h.fp);
    png_set_sig_bytes(h.png, 8);
    png_read_info(h.png, h.info);

    width = static_cast<int>(png_get_image_width(h.png, h.info));
    height = static_cast<int>(png_get_image_height(h.png, h.info));
    const int bit_depth = png_get_bit_depth(h.png, h.info);
    const int color_type = png_get_color_type(h.png, h.info);

    if (color_type != PNG_COLOR_TYPE_GRAY)
        throw Error(path.string() + ": only grayscale PNG is supported");
    if (bit_depth != 8) throw Error(path.string() + ": only 8-bit PNG is supported");
    if (width <= 0 || height <= 0) throw Error("bad PNG dimensions in " + path.string());

    png_set_interlace_handling(h.png);
    png_read_update_info(h.png, h.info);

    bytes.resize(static_cast<std::size_t>(width) * height);
    rows.resize(height);
    for (int r = 0; r < height; ++r) rows[r] = bytes.data() + static_cast<std::size_t>(r) * width;
    png_read_image(h.png, rows.data());
    png_read_end(h.png, nullptr);

    return from_bytes(bytes, width, height, path.string());
}

}  // namespace detail

/// Loads an 8-bit grayscale PGM (binary P5) or PNG image. Pixel value v maps
/// to v/255.0. Non-square or non-grayscale inputs are rejected.
inline GrayImage load_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error("no such file: " + path.string());
    GrayImage img;
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".pgm")
        img = detail::load_pgm(path);
    else if (ext == ".png")
        img = detail::load_png(path);
    else
        throw Error("unsupported image format: " + path.string() + " (expected .pgm or .png)");
    img.id = path.stem().string();
    return img;
}

/// Writes a binary (P5) 8-bit PGM. Intensities are mapped back with
/// round(v*255), so load_image(save_pgm(img)) is the identity for images that
/// came from 8-bit sources.
inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << img.side << " " << img.side << "\n255\n";
    std::vector<std::uint8_t> bytes(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        double v = img.pixels[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        bytes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

}  // namespace momir
