#include "focal/viz.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace focal {

HeatGrid heat_grid_from_attention(const AttentionTensor& att, const SpanMap& spans,
                                  int layer, int head, int t) {
    const int n = spans.img.size();
    int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n)
        throw InputError("heat_grid_from_attention: image token count is not a square");
    if (layer < 0 || layer >= att.layers) throw InputError("heat grid: layer out of range");
    if (t < 0 || t >= att.seq_len) throw InputError("heat grid: query out of range");

    HeatGrid grid;
    grid.side = side;
    grid.values.resize(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        int key = spans.img.begin + j;
        double v = 0.0;
        if (head >= 0) {
            v = att.at(layer, head, t, key);
        } else {
            for (int h = 0; h < att.heads; ++h) v += att.at(layer, h, t, key);
            v /= att.heads;
        }
        grid.values[static_cast<size_t>(j)] = v;
    }
    return grid;
}

HeatGrid normalize_grid(const HeatGrid& grid) {
    HeatGrid out = grid;
    if (grid.values.empty()) return out;
    double mn = grid.values[0], mx = grid.values[0];
    for (double v : grid.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (mx == mn) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    for (double& v : out.values) v = (v - mn) / (mx - mn);
    return out;
}

namespace {

struct LutEntry {
    std::uint8_t r, g, b;
};

// Anchors at 0, 0.25, 0.5, 0.75, 1.
constexpr double kAnchors[5][3] = {
    {0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0}};

const LutEntry* colormap_lut() {
    static const auto lut = [] {
        std::array<LutEntry, 256> t{};
        for (int i = 0; i < 256; ++i) {
            double v = i / 255.0;
            double pos = v * 4.0;
            int seg = std::min(3, static_cast<int>(pos));
            double f = pos - seg;
            double rgb[3];
            for (int c = 0; c < 3; ++c)
                rgb[c] = kAnchors[seg][c] + f * (kAnchors[seg + 1][c] - kAnchors[seg][c]);
            t[i] = {static_cast<std::uint8_t>(std::lround(rgb[0])),
                    static_cast<std::uint8_t>(std::lround(rgb[1])),
                    static_cast<std::uint8_t>(std::lround(rgb[2]))};
        }
        return t;
    }();
    return lut.data();
}

}  // namespace

void colormap_value(double v, std::uint8_t rgb[3]) {
    if (!(v >= 0.0 && v <= 1.0))
        throw InputError("colormap_value: value outside [0,1]");
    const LutEntry& e = colormap_lut()[static_cast<int>(std::lround(v * 255.0))];
    rgb[0] = e.r;
    rgb[1] = e.g;
    rgb[2] = e.b;
}

RgbImage apply_colormap(const HeatGrid& grid) {
    RgbImage img;
    img.width = grid.side;
    img.height = grid.side;
    img.pixels.resize(static_cast<size_t>(grid.side) * grid.side * 3);
    for (int y = 0; y < grid.side; ++y)
        for (int x = 0; x < grid.side; ++x)
            colormap_value(grid.at(y, x), img.px(x, y));
    return img;
}

namespace {

// Bicubic convolution kernel, a = -0.5.
double cubic_kernel(double x) {
    constexpr double a = -0.5;
    x = std::fabs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

}  // namespace

RgbImage resize_bicubic(const RgbImage& src, int width, int height) {
    if (width < 1 || height < 1) throw InputError("resize_bicubic: bad target size");
    // Horizontal pass into doubles, then vertical pass.
    std::vector<double> tmp(static_cast<size_t>(width) * src.height * 3);
    const double sx_scale = static_cast<double>(src.width) / width;
    const double sy_scale = static_cast<double>(src.height) / height;

    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < width; ++x) {
            double sx = (x + 0.5) * sx_scale - 0.5;
            int base = static_cast<int>(std::floor(sx));
            double acc[3] = {0, 0, 0};
            for (int k = -1; k <= 2; ++k) {
                int px = std::clamp(base + k, 0, src.width - 1);
                double w = cubic_kernel(sx - (base + k));
                const std::uint8_t* p = src.px(px, y);
                for (int c = 0; c < 3; ++c) acc[c] += w * p[c];
            }
            double* o = tmp.data() + (static_cast<size_t>(y) * width + x) * 3;
            for (int c = 0; c < 3; ++c) o[c] = acc[c];
        }
    }

    RgbImage out;
    out.width = width;
    out.height = height;
    out.pixels.resize(static_cast<size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y) {
        double sy = (y + 0.5) * sy_scale - 0.5;
        int base = static_cast<int>(std::floor(sy));
        for (int x = 0; x < width; ++x) {
            double acc[3] = {0, 0, 0};
            for (int k = -1; k <= 2; ++k) {
                int py = std::clamp(base + k, 0, src.height - 1);
                double w = cubic_kernel(sy - (base + k));
                const double* p = tmp.data() + (static_cast<size_t>(py) * width + x) * 3;
                for (int c = 0; c < 3; ++c) acc[c] += w * p[c];
            }
            std::uint8_t* o = out.px(x, y);
            for (int c = 0; c < 3; ++c)
                o[c] = static_cast<std::uint8_t>(
                    std::clamp(std::lround(acc[c]), 0L, 255L));
        }
    }
    return out;
}

RgbImage overlay(const RgbImage& base, const RgbImage& heat) {
    if (base.width != heat.width || base.height != heat.height)
        throw InputError("overlay: dimension mismatch");
    RgbImage out;
    out.width = base.width;
    out.height = base.height;
    out.pixels.resize(base.pixels.size());
    for (size_t i = 0; i < base.pixels.size(); ++i) {
        int sum = static_cast<int>(base.pixels[i]) + heat.pixels[i];
        out.pixels[i] = static_cast<std::uint8_t>((sum + 1) / 2);  // round half-up
    }
    return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 24));
    v.push_back(static_cast<std::uint8_t>(x >> 16));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    std::uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data() + start, static_cast<uInt>(out.size() - start));
    put_u32(out, crc);
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<size_t>(img.height) * (1 + static_cast<size_t>(img.width) * 3));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        raw.insert(raw.end(), img.px(0, y), img.px(0, y) + static_cast<size_t>(img.width) * 3);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                  Z_DEFAULT_COMPRESSION) != Z_OK)
        throw IoError("encode_png: deflate failed");
    compressed.resize(bound);

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(img.width));
    put_u32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", compressed);
    put_chunk(out, "IEND", {});
    return out;
}

void write_png(const RgbImage& img, const std::string& path) {
    auto bytes = encode_png(img);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("write_png: cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write_png: write failed for " + path);
}

RgbImage synthetic_base_image(int width, int height, std::uint64_t seed) {
    RgbImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<size_t>(width) * height * 3);
    double phase = static_cast<double>(seed % 360) * 3.14159265358979 / 180.0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            std::uint8_t* p = img.px(x, y);
            double u = static_cast<double>(x) / std::max(1, width - 1);
            double v = static_cast<double>(y) / std::max(1, height - 1);
            p[0] = static_cast<std::uint8_t>(std::lround(127.5 * (1 + std::sin(6 * u + phase))));
            p[1] = static_cast<std::uint8_t>(std::lround(255.0 * v));
            p[2] = static_cast<std::uint8_t>(std::lround(255.0 * u * v));
        }
    return img;
}

}  // namespace focal
