#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "derm/color_table.hpp"
#include "derm/common.hpp"
#include "derm/dataset.hpp"
#include "derm/image.hpp"
#include "derm/image_io.hpp"
#include "derm/mask.hpp"

namespace derm {

// Deterministic dermoscopy-like corpus. Melanoma fixtures are larger, carry
// more palette classes and wigglier borders than benign ones, with deliberate
// overlap between the groups so the classification task stays nontrivial.
struct SynthParams {
    int width = 768;
    int height = 560;
    int n_benign = 160;
    int n_melanoma = 40;
    uint64_t seed = 20260801;
};

struct SynthImage {
    RgbImage image;
    BinaryMask gt_mask;
    Label label = Label::Benign;
    std::vector<ColorClass> colors;
    std::string subtype;
};

namespace synth_detail {

// Representative RGB for each palette class; each classifies into its own
// class under the default HSV table (asserted by tests).
inline std::array<uint8_t, 3> class_rgb(ColorClass c) {
    switch (c) {
        case ColorClass::White: return {235, 228, 225};
        case ColorClass::Red: return {180, 45, 40};
        case ColorClass::LightBrown: return {170, 120, 75};
        case ColorClass::DarkBrown: return {95, 55, 35};
        case ColorClass::BlueGray: return {90, 110, 140};
        case ColorClass::Black: return {28, 20, 18};
    }
    return {0, 0, 0};
}

// Star-shaped radius function: r(t) = r0 * (1 + e*cos(2(t-phase)) + harmonics).
struct StarShape {
    double r0 = 80.0;
    double ecc = 0.1;
    double ecc_phase = 0.0;
    std::vector<double> amp;    // per harmonic j >= 3
    std::vector<double> phase;

    double radius(double t) const {
        double f = 1.0 + ecc * std::cos(2.0 * (t - ecc_phase));
        for (size_t k = 0; k < amp.size(); ++k)
            f += amp[k] * std::cos((static_cast<double>(k) + 3.0) * t + phase[k]);
        return r0 * std::max(0.2, f);
    }

    double max_radius() const {
        double m = 0.0;
        for (int i = 0; i < 720; ++i) m = std::max(m, radius(i * M_PI / 360.0));
        return m;
    }
};

// Coarse value noise: a low-resolution Gaussian grid upsampled bilinearly.
struct BlotchField {
    int gw, gh;
    std::vector<double> g;

    BlotchField(int grid_w, int grid_h, double sigma, std::mt19937_64& rng)
        : gw(grid_w), gh(grid_h), g(static_cast<size_t>(grid_w) * grid_h) {
        std::normal_distribution<double> n(0.0, sigma);
        for (double& v : g) v = n(rng);
    }

    double at(double fx, double fy) const {  // fx, fy in [0,1]
        const double x = fx * (gw - 1), y = fy * (gh - 1);
        const int x0 = std::min(static_cast<int>(x), gw - 2);
        const int y0 = std::min(static_cast<int>(y), gh - 2);
        const double wx = x - x0, wy = y - y0;
        auto v = [&](int xx, int yy) { return g[static_cast<size_t>(yy) * gw + xx]; };
        return (1 - wy) * ((1 - wx) * v(x0, y0) + wx * v(x0 + 1, y0)) +
               wy * ((1 - wx) * v(x0, y0 + 1) + wx * v(x0 + 1, y0 + 1));
    }
};

inline uint8_t clamp8(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace synth_detail

inline SynthImage synth_lesion(uint64_t seed, bool melanoma, int width, int height) {
    using namespace synth_detail;
    std::mt19937_64 rng(seed);
    auto uni = [&](double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    };
    auto gauss = [&](double s) { return std::normal_distribution<double>(0.0, s)(rng); };

    SynthImage out;
    out.label = melanoma ? Label::Melanoma : Label::Benign;
    out.image = RgbImage(width, height);
    out.gt_mask = BinaryMask(width, height);

    // Skin background: slow illumination gradient + coarse blotches + grain.
    const double base_r = 206 + gauss(4), base_g = 168 + gauss(4), base_b = 148 + gauss(4);
    const double gx = uni(-9, 9), gy = uni(-9, 9);
    BlotchField blotch(9, 7, 4.5, rng);
    std::mt19937_64 grain_rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> grain(0.0, 2.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double fx = static_cast<double>(x) / (width - 1);
            const double fy = static_cast<double>(y) / (height - 1);
            const double shade = gx * (fx - 0.5) + gy * (fy - 0.5) + blotch.at(fx, fy);
            uint8_t* p = out.image.px(x, y);
            const double n = grain(grain_rng);
            p[0] = clamp8(base_r + shade + n);
            p[1] = clamp8(base_g + shade + n);
            p[2] = clamp8(base_b + shade + n);
        }
    }

    // Lesion outline.
    StarShape shape;
    if (melanoma) {
        // Malignant outlines carry most of their amplitude in the high
        // harmonics: strong fine-scale scalloping, only mild global skew.
        shape.r0 = uni(80, 170);
        shape.ecc = uni(0.05, 0.26);
        for (int j = 3; j <= 12; ++j) {
            shape.amp.push_back(gauss(j <= 6 ? 0.026 : 0.020));
            shape.phase.push_back(uni(0, 2 * M_PI));
        }
    } else {
        // A small irritated-nevus subpopulation carries malignant-grade
        // scalloping, so border irregularity alone cannot separate cleanly.
        const bool scalloped = uni(0, 1) < 0.12;
        shape.r0 = uni(70, 132);
        shape.ecc = uni(0.04, 0.22);
        const int top_harmonic = scalloped ? 12 : 9;
        const double hi_amp = scalloped ? 0.020 : 0.012;
        for (int j = 3; j <= top_harmonic; ++j) {
            shape.amp.push_back(gauss(j <= 6 ? 0.024 : hi_amp));
            shape.phase.push_back(uni(0, 2 * M_PI));
        }
    }
    shape.ecc_phase = uni(0, 2 * M_PI);

    const double cx = width / 2.0 + uni(-25, 25);
    const double cy = height / 2.0 + uni(-25, 25);
    const double margin =
        std::min(std::min(cx, width - 1 - cx), std::min(cy, height - 1 - cy)) - 8.0;
    const double mr = shape.max_radius();
    if (mr > margin) shape.r0 *= margin / mr;

    // Color plan: a base class plus offset patches drawn from a label-biased
    // pool. Benign lesions still pick up extra classes often enough that the
    // color feature alone over-calls melanoma.
    // Pigment-poor melanomas keep malignant geometry but benign-like coloring;
    // they form the sparse hard tail of the minority class.
    const bool muted = melanoma && uni(0, 1) < 0.18;
    const ColorClass base_cls = [&] {
        const double p = uni(0, 1);
        if (muted) return ColorClass::LightBrown;
        if (melanoma) return p < 0.7 ? ColorClass::DarkBrown : ColorClass::LightBrown;
        return p < 0.5 ? ColorClass::LightBrown : ColorClass::DarkBrown;
    }();
    int n_extra;
    {
        const double p = uni(0, 1);
        if (muted)
            n_extra = p < 0.55 ? 0 : 1;
        else if (melanoma)
            n_extra = p < 0.30 ? 2 : (p < 0.78 ? 3 : 4);
        else
            n_extra = p < 0.34 ? 0 : (p < 0.78 ? 1 : 2);
    }
    std::vector<ColorClass> pool;
    std::vector<double> pool_w;
    for (int i = 0; i < kColorClassCount; ++i) {
        const ColorClass c = static_cast<ColorClass>(i);
        if (c == base_cls) continue;
        pool.push_back(c);
        double w;
        if (melanoma) {
            switch (c) {
                case ColorClass::DarkBrown: w = 0.24; break;
                case ColorClass::Black: w = 0.22; break;
                case ColorClass::BlueGray: w = 0.19; break;
                case ColorClass::White: w = 0.12; break;
                case ColorClass::Red: w = 0.11; break;
                default: w = 0.12; break;  // light brown
            }
        } else {
            switch (c) {
                case ColorClass::DarkBrown: w = 0.34; break;
                case ColorClass::LightBrown: w = 0.22; break;
                case ColorClass::Black: w = 0.12; break;
                case ColorClass::White: w = 0.11; break;
                case ColorClass::Red: w = 0.10; break;
                default: w = 0.11; break;  // blue gray
            }
        }
        pool_w.push_back(w);
    }
    struct Patch {
        ColorClass cls;
        StarShape shape;
        double px, py;
    };
    std::vector<Patch> patches;
    out.colors.push_back(base_cls);
    for (int t = 0; t < n_extra && !pool.empty(); ++t) {
        std::discrete_distribution<size_t> pick(pool_w.begin(), pool_w.end());
        const size_t id = pick(rng);
        Patch p;
        p.cls = pool[id];
        pool.erase(pool.begin() + static_cast<long>(id));
        pool_w.erase(pool_w.begin() + static_cast<long>(id));
        const double ang = uni(0, 2 * M_PI);
        const double off = uni(0.12, 0.52) * shape.r0;
        p.px = cx + off * std::cos(ang);
        p.py = cy + off * std::sin(ang);
        p.shape.r0 = uni(0.18, 0.42) * shape.r0;
        p.shape.ecc = uni(0.05, 0.25);
        p.shape.ecc_phase = uni(0, 2 * M_PI);
        for (int j = 3; j <= 6; ++j) {
            p.shape.amp.push_back(gauss(0.05));
            p.shape.phase.push_back(uni(0, 2 * M_PI));
        }
        patches.push_back(std::move(p));
        out.colors.push_back(patches.back().cls);
    }

    // Paint: base with gentle radial darkening, then patches, then noise.
    const auto base_rgb = class_rgb(base_cls);
    const double reach = shape.max_radius() + 2.0;
    const int x_lo = std::max(0, static_cast<int>(cx - reach));
    const int x_hi = std::min(width - 1, static_cast<int>(cx + reach) + 1);
    const int y_lo = std::max(0, static_cast<int>(cy - reach));
    const int y_hi = std::min(height - 1, static_cast<int>(cy + reach) + 1);
    std::normal_distribution<double> cnoise(0.0, 3.5);
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double rho = std::hypot(dx, dy);
            const double rb = shape.radius(std::atan2(dy, dx));
            if (rho > rb) continue;
            out.gt_mask.set(x, y, true);
            double r = base_rgb[0], g = base_rgb[1], b = base_rgb[2];
            const double dk = 0.90 + 0.10 * (rho / rb);  // darker toward center
            r *= dk;
            g *= dk;
            b *= dk;
            for (const Patch& p : patches) {
                const double pdx = x - p.px, pdy = y - p.py;
                if (std::hypot(pdx, pdy) <= p.shape.radius(std::atan2(pdy, pdx))) {
                    const auto prgb = class_rgb(p.cls);
                    r = prgb[0];
                    g = prgb[1];
                    b = prgb[2];
                    break;
                }
            }
            const double n = cnoise(rng);
            uint8_t* px = out.image.px(x, y);
            px[0] = clamp8(r + n);
            px[1] = clamp8(g + n);
            px[2] = clamp8(b + n);
        }
    }

    // Occasional hair strokes (thin translucent dark arcs across the frame).
    const int n_hair = [&] {
        const double p = uni(0, 1);
        return p < 0.60 ? 0 : (p < 0.85 ? 1 : 2);
    }();
    for (int hcount = 0; hcount < n_hair; ++hcount) {
        double hx = uni(0, width - 1), hy = uni(0, height - 1);
        double dir = uni(0, 2 * M_PI);
        double curve = uni(-0.01, 0.01);
        const int steps = static_cast<int>(uni(200, 500));
        for (int s = 0; s < steps; ++s) {
            const int ix = static_cast<int>(std::lround(hx));
            const int iy = static_cast<int>(std::lround(hy));
            if (ix < 0 || ix >= width || iy < 0 || iy >= height) break;
            uint8_t* p = out.image.px(ix, iy);
            p[0] = clamp8(p[0] * 0.55 + 60 * 0.45);
            p[1] = clamp8(p[1] * 0.55 + 45 * 0.45);
            p[2] = clamp8(p[2] * 0.55 + 35 * 0.45);
            hx += std::cos(dir);
            hy += std::sin(dir);
            dir += curve;
        }
    }

    std::sort(out.colors.begin(), out.colors.end());
    out.subtype = melanoma ? "melanoma" : (seed % 2 ? "atypical_nevus" : "common_nevus");
    return out;
}

// Writes images/, masks/ and manifest.csv under dir; returns the manifest path.
inline std::string write_synthetic_corpus(const std::string& dir, const SynthParams& params) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "images");
    fs::create_directories(fs::path(dir) / "masks");

    std::vector<ManifestEntry> entries;
    const int total = params.n_benign + params.n_melanoma;
    for (int i = 0; i < total; ++i) {
        const bool melanoma = i >= params.n_benign;
        const SynthImage s =
            synth_lesion(params.seed * 1000003ull + static_cast<uint64_t>(i), melanoma,
                         params.width, params.height);
        char name[32];
        std::snprintf(name, sizeof name, "syn%03d", i);
        const std::string img_rel = std::string("images/") + name + ".png";
        const std::string mask_rel = std::string("masks/") + name + "_mask.png";
        save_png(s.image, (fs::path(dir) / img_rel).string());
        RgbImage m(s.gt_mask.width, s.gt_mask.height);
        for (size_t k = 0; k < s.gt_mask.bits.size(); ++k)
            if (s.gt_mask.bits[k]) {
                m.data[k * 3] = m.data[k * 3 + 1] = m.data[k * 3 + 2] = 255;
            }
        save_png(m, (fs::path(dir) / mask_rel).string());
        ManifestEntry e;
        e.image_path = img_rel;
        e.mask_path = mask_rel;
        e.label = s.label;
        e.gt_colors = s.colors;
        e.subtype = s.subtype;
        entries.push_back(std::move(e));
    }
    const std::string manifest = (fs::path(dir) / "manifest.csv").string();
    write_manifest(entries, manifest);
    return manifest;
}

// Ground-truth masks round-trip through PNG as black/white rasters.
inline BinaryMask mask_from_image(const RgbImage& img) {
    BinaryMask m(img.width, img.height);
    for (size_t i = 0; i < m.bits.size(); ++i) {
        const int lum = img.data[i * 3] + img.data[i * 3 + 1] + img.data[i * 3 + 2];
        m.bits[i] = lum > 3 * 127 ? 1 : 0;
    }
    return m;
}

}  // namespace derm
