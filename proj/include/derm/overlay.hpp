#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "derm/color_table.hpp"
#include "derm/features.hpp"
#include "derm/image.hpp"
#include "derm/mask.hpp"

namespace derm {

struct Rgb8 {
    uint8_t r = 0, g = 0, b = 0;
};

// Display colors for region outlines, chosen to contrast with the lesion
// color they mark (e.g. dark brown regions get a red outline).
inline Rgb8 overlay_color_for(ColorClass c) {
    switch (c) {
        case ColorClass::White: return {0, 200, 200};
        case ColorClass::Red: return {40, 60, 255};
        case ColorClass::LightBrown: return {240, 220, 0};
        case ColorClass::DarkBrown: return {255, 40, 40};
        case ColorClass::BlueGray: return {0, 220, 60};
        case ColorClass::Black: return {10, 10, 10};
    }
    return {255, 255, 255};
}

inline void put_px(RgbImage& img, int x, int y, Rgb8 c) {
    if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
    uint8_t* p = img.px(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
}

// Paints mask-boundary pixels (true pixels with a false or off-grid
// 4-neighbor) onto img.
inline void draw_mask_outline(RgbImage& img, const BinaryMask& mask, Rgb8 color) {
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            const bool edge = x == 0 || y == 0 || x + 1 == mask.width ||
                              y + 1 == mask.height || !mask.at(x - 1, y) ||
                              !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1);
            if (edge) put_px(img, x, y, color);
        }
}

inline RgbImage render_snapshots(const RgbImage& base,
                                 const std::vector<std::pair<BinaryMask, Rgb8>>& layers) {
    RgbImage out = base;
    for (const auto& [mask, color] : layers) draw_mask_outline(out, mask, color);
    return out;
}

// Aligned lesion with its reflection mismatches tinted: horizontal-axis
// misses in red, vertical in blue, both in magenta.
inline RgbImage render_asymmetry(const FeatureAnalysis& a) {
    RgbImage out = a.aligned_image;
    const BinaryMask& m = a.aligned_mask;
    const int kx = static_cast<int>(std::lround(2.0 * a.aligned_centroid.x));
    const int ky = static_cast<int>(std::lround(2.0 * a.aligned_centroid.y));
    auto on = [&](int x, int y) { return m.in_bounds(x, y) && m.at(x, y); };
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            const bool miss_h = !on(x, ky - y);  // mirror across horizontal axis
            const bool miss_v = !on(kx - x, y);
            if (!miss_h && !miss_v) continue;
            Rgb8 c{200, 40, 200};
            if (miss_h && !miss_v) c = {230, 40, 40};
            if (!miss_h && miss_v) c = {40, 80, 230};
            put_px(out, x, y, c);
        }
    draw_mask_outline(out, m, {255, 255, 255});
    return out;
}

// Outlines each reported color region on the processed image.
inline RgbImage render_color_regions(const RgbImage& img, const BinaryMask& mask,
                                     const FeatureConfig& cfg,
                                     const std::vector<ColorRegion>& regions) {
    RgbImage out = img;
    for (const ColorRegion& reg : regions) {
        BinaryMask cls_mask(mask.width, mask.height);
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x) {
                if (!mask.at(x, y)) continue;
                const uint8_t* p = img.px(x, y);
                const auto c = cfg.table.classify(rgb_to_hsv_px(p[0], p[1], p[2]));
                if (c && *c == reg.cls) cls_mask.set(x, y, true);
            }
        draw_mask_outline(out, cls_mask, overlay_color_for(reg.cls));
    }
    return out;
}

}  // namespace derm
