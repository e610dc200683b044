#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "derm/color_table.hpp"
#include "derm/common.hpp"
#include "derm/contour.hpp"
#include "derm/image.hpp"
#include "derm/mask.hpp"
#include "derm/min_rect.hpp"
#include "derm/warp.hpp"

namespace derm {

// Fixed 11-slot layout: [a_h, a_v, d_white..d_black, border, colors, diameter].
struct FeatureVector {
    double a_h = 0.0;                  // % asymmetric area, horizontal flip
    double a_v = 0.0;                  // % asymmetric area, vertical flip
    std::array<double, 6> dist{};      // normalized color-centroid offsets
    double border_irregularity = 0.0;  // P^2 / (4*pi*A)
    int color_count = 0;
    double diameter_mm = 0.0;

    static constexpr int kDims = 11;

    std::vector<double> flat() const {
        return {a_h,     a_v,     dist[0],              dist[1],
                dist[2], dist[3], dist[4],              dist[5],
                border_irregularity, static_cast<double>(color_count), diameter_mm};
    }

    static const std::array<std::string, kDims>& names() {
        static const std::array<std::string, kDims> n = {
            "asymmetry_h", "asymmetry_v", "dist_white",     "dist_red",
            "dist_light_brown", "dist_dark_brown", "dist_blue_gray", "dist_black",
            "border_irregularity", "color_count", "diameter_mm"};
        return n;
    }
};

struct FeatureConfig {
    ColorTable table = default_color_table();
    double min_region_fraction = 0.01;  // region must cover >= 1% of the lesion
    double mm_per_pixel = 0.03;
};

struct ColorRegion {
    ColorClass cls;
    size_t pixel_count = 0;
    PointD centroid;
};

// Percentage of lesion area that fails to overlap its own mirror image about
// the centroid line, per axis. The XOR count halves exactly (reflection is an
// involution), so values live in [0, 100].
inline std::pair<double, double> shape_asymmetry(const BinaryMask& mask) {
    const size_t area = mask.area();
    if (area == 0) throw Error("shape_asymmetry: empty mask");
    const PointD c = centroid(mask);
    // Reflect with x -> kx - x so the mirror line passes through the centroid
    // at half-pixel resolution.
    const long kx = std::lround(2.0 * c.x);
    const long ky = std::lround(2.0 * c.y);
    size_t miss_h = 0, miss_v = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            const long mx = kx - x;
            if (mx < 0 || mx >= mask.width || !mask.at(static_cast<int>(mx), y)) ++miss_h;
            const long my = ky - y;
            if (my < 0 || my >= mask.height || !mask.at(x, static_cast<int>(my))) ++miss_v;
        }
    }
    return {100.0 * miss_h / area, 100.0 * miss_v / area};
}

// Per-class pixel counts and centroids over lesion pixels; classes below
// min_fraction of the lesion area are dropped. Output keeps report order.
inline std::vector<ColorRegion> color_variegation(const RgbImage& img, const BinaryMask& mask,
                                                  const ColorTable& table,
                                                  double min_fraction) {
    if (img.width != mask.width || img.height != mask.height)
        throw Error("color_variegation: image/mask size mismatch");
    std::array<size_t, kColorClassCount> count{};
    std::array<double, kColorClassCount> sx{}, sy{};
    size_t area = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            ++area;
            const uint8_t* p = img.px(x, y);
            const auto cls = table.classify(rgb_to_hsv_px(p[0], p[1], p[2]));
            if (!cls) continue;
            const int i = static_cast<int>(*cls);
            ++count[i];
            sx[i] += x;
            sy[i] += y;
        }
    }
    if (area == 0) throw Error("color_variegation: empty mask");
    const double min_px = min_fraction * static_cast<double>(area);
    std::vector<ColorRegion> out;
    for (int i = 0; i < kColorClassCount; ++i) {
        if (count[i] == 0 || static_cast<double>(count[i]) < min_px) continue;
        out.push_back({static_cast<ColorClass>(i), count[i],
                       {sx[i] / count[i], sy[i] / count[i]}});
    }
    return out;
}

// Distance from the lesion centroid to each color-region centroid, normalized
// by the equivalent radius sqrt(A/pi); absent classes report 0.
inline std::array<double, 6> structural_asymmetry(PointD lesion_centroid, size_t lesion_area,
                                                  const std::vector<ColorRegion>& regions) {
    if (lesion_area == 0) throw Error("structural_asymmetry: empty lesion");
    const double r_eq = std::sqrt(static_cast<double>(lesion_area) / M_PI);
    std::array<double, 6> d{};
    for (const ColorRegion& r : regions)
        d[static_cast<int>(r.cls)] = dist(lesion_centroid, r.centroid) / r_eq;
    return d;
}

// I = P^2 / (4*pi*A) on the unwarped mask; 1 for a perfect disk, grows with
// boundary wiggle.
inline double border_irregularity(const BinaryMask& mask) {
    const size_t area = mask.area();
    if (area == 0) throw Error("border_irregularity: empty mask");
    const double p = contour_perimeter(trace_contour(mask));
    return p * p / (4.0 * M_PI * static_cast<double>(area));
}

inline double diameter_mm(double mar_long_side_px, double mm_per_pixel) {
    if (!(mm_per_pixel > 0.0)) throw Error("diameter_mm: mm_per_pixel must be positive");
    return 2.0 * mar_long_side_px * mm_per_pixel;
}

// Everything extract_features computes, kept for overlay rendering.
struct FeatureAnalysis {
    FeatureVector vec;
    Contour contour;
    MinAreaRect mar;
    BinaryMask aligned_mask;
    RgbImage aligned_image;
    PointD aligned_centroid;
    std::vector<ColorRegion> regions;
};

// Rotates the lesion so the MAR long axis is horizontal (asymmetry and color
// geometry are measured in that frame), recentering the centroid onto the
// canvas center; the canvas grows when the rotated box would not fit, so
// nothing is cropped.
inline FeatureAnalysis extract_features_full(const RgbImage& img, const BinaryMask& mask,
                                             const FeatureConfig& cfg = {}) {
    if (img.width != mask.width || img.height != mask.height)
        throw Error("extract_features: image/mask size mismatch");
    if (mask.area() == 0) throw Error("extract_features: empty mask");

    FeatureAnalysis out;
    out.contour = trace_contour(mask);
    out.vec.border_irregularity = border_irregularity(mask);
    out.mar = min_area_rect(out.contour);
    out.vec.diameter_mm = diameter_mm(out.mar.long_side, cfg.mm_per_pixel);

    const PointD c_in = centroid(mask);
    const double theta = -out.mar.angle;  // content rotates by +theta when sampled

    // Canvas sizing from the rotated MAR corners (they bound the lesion).
    double hx = 1.0, hy = 1.0;
    const double ca = std::cos(theta), sa = std::sin(theta);
    for (const PointD& q : out.mar.corners()) {
        const double rx = q.x - c_in.x, ry = q.y - c_in.y;
        hx = std::max(hx, std::abs(ca * rx - sa * ry));
        hy = std::max(hy, std::abs(sa * rx + ca * ry));
    }
    int out_w = img.width, out_h = img.height;
    if (2.0 * (hx + 2.0) > out_w || 2.0 * (hy + 2.0) > out_h) {
        const int side = 2 * static_cast<int>(std::ceil(std::max(hx, hy) + 3.0));
        out_w = std::max(out_w, side);
        out_h = std::max(out_h, side);
    }
    const PointD c_out{(out_w - 1) / 2.0, (out_h - 1) / 2.0};
    const AffineMap map = build_alignment(theta, c_in, c_out);
    out.aligned_mask = warp(mask, map, out_w, out_h);
    out.aligned_image = warp(img, map, out_w, out_h);
    if (out.aligned_mask.area() == 0)
        throw Error("extract_features: alignment produced an empty mask");

    std::tie(out.vec.a_h, out.vec.a_v) = shape_asymmetry(out.aligned_mask);
    out.aligned_centroid = centroid(out.aligned_mask);
    out.regions = color_variegation(out.aligned_image, out.aligned_mask, cfg.table,
                                    cfg.min_region_fraction);
    out.vec.dist = structural_asymmetry(out.aligned_centroid, out.aligned_mask.area(),
                                        out.regions);
    out.vec.color_count = static_cast<int>(out.regions.size());
    return out;
}

inline FeatureVector extract_features(const RgbImage& img, const BinaryMask& mask,
                                      const FeatureConfig& cfg = {}) {
    return extract_features_full(img, mask, cfg).vec;
}

}  // namespace derm
