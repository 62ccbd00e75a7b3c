#pragma once

#include <cstdint>
#include <string>

#include "focal/types.hpp"

namespace focal {

// Square grid of one query token's attention over the image keys.
struct HeatGrid {
    int side = 0;
    std::vector<double> values;  // row-major, side*side

    double at(int r, int c) const { return values[static_cast<size_t>(r) * side + c]; }
};

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // rgb, row-major

    std::uint8_t* px(int x, int y) {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* px(int x, int y) const {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
};

// Attention row of query t over the image span, reshaped to sqrt(n) x sqrt(n).
// head < 0 selects the head-mean.
HeatGrid heat_grid_from_attention(const AttentionTensor& att, const SpanMap& spans,
                                  int layer, int head, int t);

// (A - min) / (max - min); constant grids map to all zeros.
HeatGrid normalize_grid(const HeatGrid& grid);

// Piecewise-linear blue->red lookup table, 256 entries.
// 0 -> (0,0,255), 0.25 -> (0,255,255), 0.5 -> (0,255,0),
// 0.75 -> (255,255,0), 1 -> (255,0,0).
void colormap_value(double v, std::uint8_t rgb[3]);
RgbImage apply_colormap(const HeatGrid& grid);

// Bicubic convolution (a = -0.5), channel-wise, edge-clamped, output
// clamped to [0,255].
RgbImage resize_bicubic(const RgbImage& src, int width, int height);

// 50/50 alpha blend, rounded half-up.
RgbImage overlay(const RgbImage& base, const RgbImage& heat);

void write_png(const RgbImage& img, const std::string& path);
std::vector<std::uint8_t> encode_png(const RgbImage& img);

// Deterministic synthetic base image (smooth gradient) used when no real
// photo backs the toy image tokens.
RgbImage synthetic_base_image(int width, int height, std::uint64_t seed);

}  // namespace focal
