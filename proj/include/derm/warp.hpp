#pragma once

#include <array>
#include <cmath>

#include "derm/common.hpp"
#include "derm/image.hpp"
#include "derm/mask.hpp"

namespace derm {

// 2x3 affine sampling map: the output pixel (x, y) reads the input at
// (m0*x + m1*y + m2, m3*x + m4*y + m5).
struct AffineMap {
    std::array<double, 6> m{1, 0, 0, 0, 1, 0};

    PointD apply(PointD p) const {
        return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
    }
};

// Rotation-about-centroid map with isotropic scale in (0, 1]:
//   alpha = sf*cos(theta), beta = sf*sin(theta)
//   M = [ alpha  beta  (1-alpha)*cx - beta*cy ]
//       [ -beta  alpha  beta*cx + (1-alpha)*cy ]
inline AffineMap build_rotation(double theta, double scale, PointD centroid) {
    if (!(scale > 0.0 && scale <= 1.0)) throw Error("build_rotation: scale must be in (0,1]");
    const double a = scale * std::cos(theta);
    const double b = scale * std::sin(theta);
    AffineMap map;
    map.m = {a, b, (1.0 - a) * centroid.x - b * centroid.y,
             -b, a, b * centroid.x + (1.0 - a) * centroid.y};
    return map;
}

// Same rotation form, but the fixed point moves: the output pixel at c_out
// samples the input at c_in. Under this sampling convention content rotates by
// +theta, so aligning a shape tilted by t takes theta = -t.
inline AffineMap build_alignment(double theta, PointD c_in, PointD c_out) {
    const double a = std::cos(theta);
    const double b = std::sin(theta);
    AffineMap map;
    map.m = {a, b, c_in.x - (a * c_out.x + b * c_out.y),
             -b, a, c_in.y - (-b * c_out.x + a * c_out.y)};
    return map;
}

// Nearest-neighbor resampling; out-of-range reads are background (false).
inline BinaryMask warp(const BinaryMask& mask, const AffineMap& map, int out_w = 0,
                       int out_h = 0) {
    if (mask.empty()) throw Error("warp: empty mask");
    if (out_w <= 0) out_w = mask.width;
    if (out_h <= 0) out_h = mask.height;
    BinaryMask out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const PointD s = map.apply({static_cast<double>(x), static_cast<double>(y)});
            const int sx = static_cast<int>(std::lround(s.x));
            const int sy = static_cast<int>(std::lround(s.y));
            if (mask.in_bounds(sx, sy) && mask.at(sx, sy)) out.set(x, y, true);
        }
    }
    return out;
}

// Bilinear resampling; out-of-range reads are black.
inline RgbImage warp(const RgbImage& img, const AffineMap& map, int out_w = 0, int out_h = 0) {
    if (img.empty()) throw Error("warp: empty image");
    if (out_w <= 0) out_w = img.width;
    if (out_h <= 0) out_h = img.height;
    RgbImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const PointD s = map.apply({static_cast<double>(x), static_cast<double>(y)});
            if (s.x < 0.0 || s.y < 0.0 || s.x > img.width - 1 || s.y > img.height - 1) continue;
            const int x0 = static_cast<int>(s.x);
            const int y0 = static_cast<int>(s.y);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const int y1 = std::min(y0 + 1, img.height - 1);
            const double wx = s.x - x0, wy = s.y - y0;
            uint8_t* dst = out.px(x, y);
            for (int c = 0; c < 3; ++c) {
                const double v = (1 - wy) * ((1 - wx) * img.px(x0, y0)[c] + wx * img.px(x1, y0)[c]) +
                                 wy * ((1 - wx) * img.px(x0, y1)[c] + wx * img.px(x1, y1)[c]);
                dst[c] = static_cast<uint8_t>(std::lround(v));
            }
        }
    }
    return out;
}

}  // namespace derm
