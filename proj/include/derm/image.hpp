#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "derm/common.hpp"

namespace derm {

// Interleaved 8-bit RGB raster, row-major, no padding.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;  // size = width*height*3

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}

    size_t idx(int x, int y) const { return (static_cast<size_t>(y) * width + x) * 3; }
    const uint8_t* px(int x, int y) const { return data.data() + idx(x, y); }
    uint8_t* px(int x, int y) { return data.data() + idx(x, y); }
    bool empty() const { return data.empty(); }
};

// One float plane per channel; YUV planes are unclamped (U and V go negative).
struct PlanarImage {
    int width = 0;
    int height = 0;
    std::array<std::vector<float>, 3> plane;

    PlanarImage() = default;
    PlanarImage(int w, int h) : width(w), height(h) {
        for (auto& p : plane) p.assign(static_cast<size_t>(w) * h, 0.0f);
    }
    size_t size() const { return static_cast<size_t>(width) * height; }
};

struct Hsv {
    double h = 0.0;  // degrees [0, 360)
    double s = 0.0;  // [0, 1]
    double v = 0.0;  // [0, 1]
};

// NTSC Y'UV, computed in double (the planar buffers narrow to float). Row
// sums of the U and V coefficients are exactly zero, so gray inputs land on
// the Y axis.
inline void rgb_to_yuv_px(uint8_t r, uint8_t g, uint8_t b, double& y, double& u, double& v) {
    y = 0.299 * r + 0.587 * g + 0.114 * b;
    u = -0.147 * r - 0.289 * g + 0.436 * b;
    v = 0.615 * r - 0.515 * g - 0.100 * b;
}

inline PlanarImage rgb_to_yuv(const RgbImage& img) {
    PlanarImage out(img.width, img.height);
    const size_t n = out.size();
    for (size_t i = 0; i < n; ++i) {
        double y, u, v;
        rgb_to_yuv_px(img.data[i * 3], img.data[i * 3 + 1], img.data[i * 3 + 2], y, u, v);
        out.plane[0][i] = static_cast<float>(y);
        out.plane[1][i] = static_cast<float>(u);
        out.plane[2][i] = static_cast<float>(v);
    }
    return out;
}

inline Hsv rgb_to_hsv_px(uint8_t r8, uint8_t g8, uint8_t b8) {
    const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    Hsv out;
    out.v = mx;
    out.s = mx > 0.0 ? d / mx : 0.0;
    if (d > 0.0) {
        double h;
        if (mx == r)
            h = std::fmod((g - b) / d, 6.0);
        else if (mx == g)
            h = (b - r) / d + 2.0;
        else
            h = (r - g) / d + 4.0;
        h *= 60.0;
        if (h < 0.0) h += 360.0;
        out.h = h;
    }
    return out;
}

// Bilinear resize with corner-aligned sampling: src = dst * (in-1)/(out-1).
// Convex interpolation weights keep every output inside the input min/max.
inline RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw Error("resize_bilinear: output dims must be positive");
    if (img.width < 1 || img.height < 1) throw Error("resize_bilinear: empty input");
    if (out_w == img.width && out_h == img.height) return img;

    RgbImage out(out_w, out_h);
    const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / (out_w - 1) : 0.0;
    const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / (out_h - 1) : 0.0;
    for (int y = 0; y < out_h; ++y) {
        const double fy = out_h > 1 ? y * sy : (img.height - 1) / 2.0;
        const int y0 = std::min(static_cast<int>(fy), img.height - 1);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx = out_w > 1 ? x * sx : (img.width - 1) / 2.0;
            const int x0 = std::min(static_cast<int>(fx), img.width - 1);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            uint8_t* dst = out.px(x, y);
            for (int c = 0; c < 3; ++c) {
                const double v00 = img.px(x0, y0)[c], v10 = img.px(x1, y0)[c];
                const double v01 = img.px(x0, y1)[c], v11 = img.px(x1, y1)[c];
                const double v = (1 - wy) * ((1 - wx) * v00 + wx * v10) +
                                 wy * ((1 - wx) * v01 + wx * v11);
                dst[c] = static_cast<uint8_t>(std::lround(v));
            }
        }
    }
    return out;
}

// Weighted per-pixel combination of the three planes into the scalar field the
// segmentation evolves on.
inline std::vector<float> combine_channels(const PlanarImage& planes,
                                           const std::array<double, 3>& weights) {
    const double wsum = weights[0] + weights[1] + weights[2];
    if (!(wsum > 0.0)) throw Error("combine_channels: weights must sum to a positive value");
    std::vector<float> u(planes.size());
    const double w0 = weights[0] / wsum, w1 = weights[1] / wsum, w2 = weights[2] / wsum;
    for (size_t i = 0; i < u.size(); ++i) {
        u[i] = static_cast<float>(w0 * planes.plane[0][i] + w1 * planes.plane[1][i] +
                                  w2 * planes.plane[2][i]);
    }
    return u;
}

}  // namespace derm
